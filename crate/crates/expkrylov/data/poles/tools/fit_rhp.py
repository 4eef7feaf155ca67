import numpy as np, sys
from scipy.optimize import least_squares
S = 1e6
xs = np.concatenate([[0.0], np.logspace(-4, np.log10(S), 900)])
def poles_from(p):
    k = len(p)//2
    z = np.exp(p[:k]) + 1j*p[k:]
    return np.concatenate([z, z.conj()])
def resid(p, ret=False):
    xi = poles_from(p); z = -xs
    M = np.column_stack([np.ones_like(z, complex)] + [1.0/(z - q) for q in xi])
    f = np.exp(z).astype(complex)
    coef, *_ = np.linalg.lstsq(M, f, rcond=None)
    r = M @ coef - f
    return (r, coef) if ret else np.concatenate([r.real, r.imag])*1e6
k = int(sys.argv[1])
best = None
rng = np.random.default_rng(1)
for a,b,c in [(6,1,2.6),(8,1,2.4),(5,0.5,2.2),(7,2,2.8),(9,1.5,2.0)]:
    im = np.linspace(1.2, c*k, k); re = np.linspace(a, b, k)
    p = np.concatenate([np.log(re), im])
    for it in range(4):
        sol = least_squares(resid, p, diff_step=1e-7, max_nfev=3000, xtol=1e-15, ftol=1e-15, gtol=1e-15)
        p = sol.x
    e = np.max(np.abs(resid(p, True)[0]))
    print(k, (a,b,c), e, flush=True)
    if best is None or e < best[0]: best = (e, p)
e,p = best
xi = poles_from(p)
print("maxerr", e)
for q in sorted(xi[:k], key=lambda q: q.imag):
    print("%r %r" % (q.real, q.imag))
