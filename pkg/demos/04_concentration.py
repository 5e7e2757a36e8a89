"""Concentration of the subsampled output and noise norms.

With IID Gaussian inputs at every second slot, the per-slot energies of
the received block and of the noise alone settle onto
sigma2 + P + alphaL * P and sigma2 + alphaL * P as the block grows.
"""

from heatchan import CoefficientSpec, lemma2_check

spec = CoefficientSpec.geometric(0.5)
report = lemma2_check(spec, sigma2=1.0, P=10.0, L=2,
                      n_grid=[500, 2000, 8000, 32_000],
                      eps=0.5, trials=300, seed=7, workers=2)

print(f"targets: |y|^2/m -> {report.target_y:.4f}, |z|^2/m -> {report.target_z:.4f}")
print(f"{'n':>6} {'mean_y':>9} {'mean_z':>9} {'sd_y':>8} {'sd_z':>8} {'hit@0.5':>8}")
for i, n in enumerate(report.n_grid):
    print(f"{n:>6} {report.mean_y[i]:>9.4f} {report.mean_z[i]:>9.4f} "
          f"{report.var_y[i] ** 0.5:>8.4f} {report.var_z[i] ** 0.5:>8.4f} "
          f"{report.hit_frac[i]:>8.3f}")
