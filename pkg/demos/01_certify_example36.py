# %% [markdown]
# # Certifying the sqrt example
#
# f(t) = sqrt(t - 2) for t >= 2 (zero below) on the unit ball of R^3, p = 2.
# We build the spec in code, run the certificate and read off the interval
# of lambda for which three solutions are guaranteed.

# %%
from pathlib import Path

from pbiharm.certificate import certify
from pbiharm.core import parse_spec

spec = parse_spec((Path(__file__).parent / "configs" / "example36.ini").read_text())
report = certify(spec)

print(f"k (embedding bound) = {report.k:.10g}   [{report.k_source}]")
print(f"sigma = {report.sigma:.10g}, K = {report.K:.6g}, eta = {report.eta:.6g}")
print(f"Phi(u_delta) = {report.phi_test:.6g}, Psi(u_delta) = {report.psi_test:.6g}")
print(f"max F on [-gamma, gamma] = {report.max_F}")

# %% [markdown]
# Every hypothesis comes with a margin; positive means satisfied.

# %%
for v in report.verdicts:
    print(f"  {v.name:8s} holds={v.holds!s:5s} margin={v.margin:+.4g}  {v.detail}")

# %% [markdown]
# F vanishes on the sup-level set, so the upper end of the interval is
# infinite, and the bound for the second interval is exactly h * lambda1.

# %%
iv = report.intervals
print(f"granted = {report.granted}")
print(f"Lambda1 = ]{iv.lambda1:.10g}, {iv.lambda2}[")
for h in (1.5, 2.0, 10.0):
    rep_h = certify(parse_spec((Path(__file__).parent / "configs" / "example36.ini")
                               .read_text().replace("h = 2", f"h = {h}")))
    print(f"h = {h:4}: lambda3h = {rep_h.intervals.lambda3h:.10g}"
          f"  ratio = {rep_h.intervals.lambda3h / rep_h.intervals.lambda1:.15g}")

# %% [markdown]
# Larger delta moves lambda1 around: the annulus contribution grows with
# delta while Phi(u_delta) grows like delta^2.

# %%
for delta in (4, 8, 16, 32):
    text = (Path(__file__).parent / "configs" / "example36.ini").read_text()
    rep_d = certify(parse_spec(text.replace("delta = 8", f"delta = {delta}")))
    lam1 = rep_d.intervals.lambda1 if rep_d.intervals else float("nan")
    print(f"delta = {delta:3d}: granted={rep_d.granted}, lambda1 = {lam1:.6g}")
