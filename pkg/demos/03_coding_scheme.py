"""The periodic Gaussian scheme with nearest-neighbor decoding.

For truncated heating (memory span 4), transmitting every 4th slot lets
the chip cool completely between symbols, so the subsampled channel is
clean AWGN.  Sweeping the rate across the limit (1/2L) log(1 + L SNR)
shows the block-error waterfall; short blocks keep the codebooks small,
at the price of a soft transition.
"""

import math

from heatchan import (
    ChannelParams,
    CoefficientSpec,
    SchemeParams,
    scheme_error_probability,
    truncated_rate,
)

spec = CoefficientSpec.truncated(4, 1.0)
snr = 100.0
params = ChannelParams(sigma2=1.0, power=snr)
L = 4
limit = truncated_rate(4, L, snr)
print(f"rate limit (1/2L) log(1 + L snr) = {limit:.4f} nats/use")

for n in (8, 16):
    print(f"\nblock length n = {n} ({n // L} active slots):")
    for frac in (0.3, 0.6, 0.9, 1.2, 1.5):
        rate = frac * limit
        messages = max(2, round(math.exp(rate * n)))
        if messages > 1 << 17:
            print(f"  rate {rate:5.3f} ({frac:>4.0%} of limit): skipped, "
                  f"|M|={messages} too large for a demo")
            continue
        scheme = SchemeParams(L=L, P=snr, message_count=messages, n=n)
        est = scheme_error_probability(spec, params, scheme,
                                       scheme.active_variance("lp"),
                                       trials=200, seed=42, workers=2)
        print(f"  rate {rate:5.3f} ({frac:>4.0%} of limit), |M|={messages:>6}: "
              f"err {est.err_prob:.3f}  CI [{est.ci_lo:.3f}, {est.ci_hi:.3f}]")
