"""The capacity dichotomy, seen through the rate formulas.

Geometric coefficient decay pins the best achievable-rate formula to a
plateau no matter how much power is available; coefficients that die out
(truncated) or collapse super-exponentially let the rate grow like log SNR.
The classifier reads the same story off the coefficient ratios.
"""

from heatchan import CoefficientSpec, classify, dichotomy_demo

specs = [
    CoefficientSpec.geometric(0.5),
    CoefficientSpec.truncated(4, 1.0),
    CoefficientSpec.superexponential(0.5),
    CoefficientSpec.even_one(),
    CoefficientSpec.odd_one(),
]

print("classifier verdicts (horizon 128):")
for spec in specs:
    res = classify(spec, 128)
    print(f"  {spec.label:<14} {res.verdict.value:<14} "
          f"ratio range [{res.liminf_ratio_estimate:.3g}, "
          f"{res.limsup_ratio_estimate:.3g}]")

snr_grid = [1e1, 1e2, 1e3, 1e4, 1e5, 1e6]
rows, flags = dichotomy_demo(specs, snr_grid, range(1, 9))

print("\nbest formula rate (nats/use) over periods 1..8:")
print("  snr:      " + "".join(f"{s:>10.0e}" for s in snr_grid))
for spec in specs:
    rates = [r["rate_nats"] for r in rows if r["spec"] == spec.label]
    print(f"  {spec.label:<14}" + "".join(f"{v:>10.4f}" for v in rates)
          + f"   -> {flags[spec.label]}")
