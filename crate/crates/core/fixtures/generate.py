# Regenerates the ax_n* fixtures from an independent numpy implementation.
# Run from crates/core: python3 fixtures/generate.py
import numpy as np, os
rng = np.random.default_rng(20210901)
for n in (2, 3):
    nelt = 2
    out = f"fixtures/ax_n{n}"
    os.makedirs(out, exist_ok=True)
    U = rng.uniform(-1, 1, size=(nelt, n, n, n))          # [e,k,j,i]
    G = rng.uniform(-1, 1, size=(nelt, n, n, n, 6))       # [e,k,j,i,c]
    dflat = rng.uniform(-1, 1, size=n * n)
    D = dflat.reshape(n, n).T                               # D[i,j] = dflat[i + n*j]
    W = np.empty_like(U)
    for e in range(nelt):
        u = U[e]
        ur = np.einsum('il,kjl->kji', D, u)
        us = np.einsum('jl,kli->kji', D, u)
        ut = np.einsum('kl,lji->kji', D, u)
        g = G[e]
        wr = g[..., 0] * ur + g[..., 1] * us + g[..., 2] * ut
        ws = g[..., 1] * ur + g[..., 3] * us + g[..., 4] * ut
        wt = g[..., 2] * ur + g[..., 4] * us + g[..., 5] * ut
        W[e] = (np.einsum('li,kjl->kji', D, wr) + np.einsum('lj,kli->kji', D, ws)
                + np.einsum('lk,lji->kji', D, wt))
    def dump(name, arr, note):
        with open(f"{out}/{name}.txt", "w") as f:
            f.write(f"# {note}\n")
            for v in arr.ravel():
                f.write(repr(float(v)) + "\n")
    dump("u", U, f"n={n} nelt={nelt}; u(i,j,k,e), i fastest")
    dump("g", G, f"n={n} nelt={nelt}; six geometric factors per point, component fastest")
    dump("d", dflat, f"n={n}; derivative matrix, column-major d(i,j) = d[i + n*j]")
    dump("w", W, f"n={n} nelt={nelt}; expected w = A u, numpy einsum reference")
