import numpy as np, sys
# usage: python3 cf_poles.py  (prints poles for n = 12, 14, 16)
def cf(n, K=75, nf=1024, scl=9.0):
    w = np.exp(2j*np.pi*np.arange(nf)/nf)
    t = w.real
    F = np.exp(scl*(t-1)/(t+1+1e-16))
    c = np.real(np.fft.fft(F))/nf
    f = np.polyval(c[K::-1], w)
    from scipy.linalg import hankel, svd
    U,S,Vh = svd(hankel(c[1:K+1]))
    V = Vh.conj().T
    s = S[n]
    u = U[K-1::-1, n].conj(); v = V[:, n].conj()
    zz = np.zeros(nf-K)
    b = np.fft.fft(np.concatenate([u,zz]))/np.fft.fft(np.concatenate([v,zz]))
    rt = f - s*w**K*b
    zr = np.roots(v); qj = zr[np.abs(zr)>1]
    qc = np.poly(qj)
    pt = rt*np.polyval(qc,w)
    ptc = np.real(np.fft.fft(pt)/nf)
    ptc = ptc[n::-1]
    ci = np.zeros(n, complex)
    for k in range(n):
        q = qj[k]; q2 = np.poly(np.delete(qj,k))
        ci[k] = np.polyval(ptc,q)/np.polyval(q2,q)
    zi = scl*(qj-1)**2/(qj+1)**2
    ci = 4*ci*zi/(qj**2-1)
    return zi, ci, s
for n in (12,14,16):
    z,c,s = cf(n)
    x = -np.logspace(-4, 4, 4000)
    # r_inf from large |x|
    r = lambda xx: np.array([np.sum(c/(xi - z)) for xi in xx])
    rinf = -np.real(r(np.array([-1e12])))[0]
    err = np.max(np.abs(np.exp(x) - (rinf + r(x)).real))
    print(n, "s=",s, "err=",err, "len", len(z))
    for zz in sorted(z, key=lambda q:(q.real, q.imag)):
        print("  ", repr(zz.real), repr(zz.imag))
