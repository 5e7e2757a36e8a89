"""The converse-side ceiling for geometrically decaying coefficients.

When successive coefficient ratios stay above some rho > 0, the mutual
information per channel use is eventually bounded by K - log(beta_tilde),
a constant independent of the power budget.  The demo evaluates the
constant for a few geometric profiles and compares it with where the
achievable-rate formula actually plateaus.
"""

import math

from heatchan import (
    CoefficientSpec,
    NoiseDistribution,
    achievable_rate_opt,
    alpha_L,
    converse_constant,
)

noise = NoiseDistribution.gaussian()
for rho in (0.3, 0.5, 0.7, 0.9):
    spec = CoefficientSpec.geometric(rho)
    rep = converse_constant(spec, rho, 1, noise, delta=1.0, eta=0.5,
                            eps_delta_eta=0.0)
    best = max(achievable_rate_opt(1e8, 1.0, alpha_L(spec, L), L).pre_limit_rate
               for L in range(1, 9))
    print(f"rho={rho}: beta_tilde={rep.beta_tilde:.3f}  K={rep.K:.3f}  "
          f"ceiling K - log(beta_tilde) = {rep.bound:.3f} nats/use  "
          f"(scheme plateau ~{best:.3f}, half-log {0.5 * math.log(1 / rho):.3f})")
