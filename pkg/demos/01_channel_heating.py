"""How past transmissions heat the channel.

Sends a burst of energy followed by silence and watches the noise floor
rise and then cool back down, for a geometrically-decaying and a truncated
coefficient profile.
"""

import numpy as np

from heatchan import ChannelParams, CoefficientSpec, simulate_block, variance_profile

sigma2 = 1.0
burst = np.concatenate([np.full(8, 5.0), np.zeros(24)])

for spec in (CoefficientSpec.geometric(0.5), CoefficientSpec.truncated(4, 1.0)):
    var = variance_profile(spec, sigma2, burst)
    print(f"\n{spec.label}: noise variance along the block")
    for k in (1, 4, 8, 9, 10, 12, 16, 24, 32):
        bar = "#" * int(round(2 * var[k - 1]))
        print(f"  k={k:>2}  var={var[k - 1]:7.3f}  {bar}")

# empirical check on one slot: variance right after the burst
spec = CoefficientSpec.geometric(0.5)
params = ChannelParams(sigma2=sigma2)
trials = 20_000
r = np.empty(trials)
for t in range(trials):
    r[t] = simulate_block(spec, params, burst, seed=t)[8] - burst[8]
print(f"\nempirical var at k=9: {r.var():.3f} vs law "
      f"{variance_profile(spec, sigma2, burst)[8]:.3f}")
