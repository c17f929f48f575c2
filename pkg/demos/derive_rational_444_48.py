"""Derive a rational <4,4,4;48> algorithm from a published complex one.

The starting point is the complex-valued 48-multiplication 4x4 scheme
shipped as straight-line Python in the examples corpus.  Steps:

1. read its U, V, W by running the straight-line code on unit matrices;
2. search the isotropy group ``U -> X U Y^-1, V -> Y V Z^-1,
   W -> Z W X^-1`` for a point where every factor is a complex multiple of
   a real matrix, then strip the phases (Levenberg-Marquardt on
   ``1 - |u.u| / |u|^2``);
3. polish the real scheme on the Brent equations;
4. fix the remaining real gauge with projective frames built from the
   rank-one factors, normalise rows and round to small denominators;
5. certify the result exactly and write it.

Usage: python3 demos/derive_rational_444_48.py [source.py] [-o out.json]
"""

import argparse
import glob
import itertools
import textwrap
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy.optimize as so

from triagg import io
from triagg.core import BilinearAlgorithm
from triagg.sparse import SparseMatrix
from triagg.verify import certify, verify_brent

ROOT = Path(__file__).resolve().parents[1]
DEFAULT_SOURCE = "examples/*/r023__*matrix_multiplication_algorithms.py"

I4 = np.eye(4)
MM = np.einsum("bc,de,fa->abcdef", I4, I4, I4)


def extract(path: Path):
    """Run the straight-line 4x4 routine on unit inputs to read U, V, W."""
    src = path.read_text()
    start = src.index("def alphaevolve_4x4")
    body = src[start : src.index("\ndef ", start + 10)].split("\n")[1:]
    body = [ln for ln in body if ln.startswith("    ") or not ln.strip()]
    body = [ln for ln in body if '"""' not in ln and "Uses exactly" not in ln and "optimized algorithm" not in ln]
    code = textwrap.dedent("\n".join(body))
    pre = code[: code.index("m = np.zeros")]
    post = code[code.index("C[0,0]") :]
    post = "\n".join(ln for ln in post.split("\n") if not any(s in ln for s in ("A", "B", "return", "is_real")))
    post = post[: post.index("\n\n", post.index("C[3,3]"))]
    U = np.zeros((48, 16), complex)
    V = np.zeros((48, 16), complex)
    W = np.zeros((48, 16), complex)
    for idx in range(16):
        E = np.zeros((4, 4))
        E.flat[idx] = 1
        g = {"np": np, "A": E, "B": E}
        exec(pre, g)
        for r in range(48):
            U[r, idx] = g[f"a{r}"]
            V[r, idx] = g[f"b{r}"]
    consts = {
        "half": 0.5, "half_j": 0.5j, "neg_half": -0.5, "neg_half_j": -0.5j,
        "half_p_half_j": 0.5 + 0.5j, "half_m_half_j": 0.5 - 0.5j,
    }
    for r in range(48):
        m = np.zeros(48, complex)
        m[r] = 1
        g = {"np": np, "m": m, "C": np.zeros((4, 4), complex), **consts}
        exec(post, g)
        W[r] = g["C"].ravel()
    # trace form: W's rows are C^T in row-major order
    return U.reshape(48, 4, 4), V.reshape(48, 4, 4), W.reshape(48, 4, 4).transpose(0, 2, 1)


def brent_error(U, V, W) -> float:
    return float(np.abs(np.einsum("rab,rcd,ref->abcdef", U, V, W) - MM).max())


def realify(U, V, W, seed=0, restarts=40):
    def unpack(p):
        p = p.reshape(2, 3, 4, 4)
        return p[0] + 1j * p[1]

    def moved(p):
        X, Y, Z = unpack(p)
        return X @ U @ np.linalg.inv(Y), Y @ V @ np.linalg.inv(Z), Z @ W @ np.linalg.inv(X)

    def residual(p):
        out = []
        for F in moved(p):
            F = F.reshape(48, 16)
            out.append(1 - np.abs((F * F).sum(1)) / (np.abs(F) ** 2).sum(1))
        return np.concatenate(out)

    rng = np.random.default_rng(seed)
    p0_base = np.concatenate([np.tile(I4.ravel(), 3), np.zeros(48)])
    for attempt in range(restarts):
        fit = so.least_squares(residual, p0_base + 0.5 * rng.standard_normal(96), method="lm", max_nfev=4000)
        if np.sum(fit.fun**2) < 1e-20:
            break
    else:
        raise RuntimeError("no real point found in the isotropy orbit")
    print(f"real point found on attempt {attempt + 1}")
    out, scale = [], np.ones(48, complex)
    for F in moved(fit.x):
        F = F.reshape(48, 16).copy()
        for r in range(48):
            k = np.argmax(np.abs(F[r]))
            ph = F[r, k] / abs(F[r, k])
            F[r] /= ph
            scale[r] *= ph
        out.append(F.real)
    Ur, Vr, Wr = out
    Wr = Wr * scale.real[:, None]
    return Ur, Vr, Wr


def polish(U, V, W):
    target = MM.ravel()

    def f(x):
        a, b, c = x.reshape(3, 48, 16)
        return np.einsum("ra,rb,rc->abc", a, b, c).ravel() - target

    fit = so.least_squares(f, np.concatenate([U.ravel(), V.ravel(), W.ravel()]), method="lm",
                           xtol=1e-15, ftol=1e-15, gtol=1e-15)
    return (m.reshape(48, 4, 4) for m in fit.x.reshape(3, 48, 16))


def _rank_one(F):
    out = []
    for r in range(48):
        u, s, vt = np.linalg.svd(F[r])
        if s[1] < 1e-9 * s[0]:
            out.append((u[:, 0] * s[0], vt[0]))
    return out


def _distinct(vs):
    out = []
    for v in vs:
        v = v / np.linalg.norm(v)
        if all(abs(abs(v @ w) - 1) > 1e-6 for w in out):
            out.append(v)
    return out


def _frame(vecs):
    """Matrix sending four vectors to the unit basis and a fifth to (1,1,1,1)."""
    for combo in itertools.combinations(range(len(vecs)), 5):
        P = np.array([vecs[i] for i in combo[:4]]).T
        if abs(np.linalg.det(P / np.linalg.norm(P, axis=0))) < 1e-3:
            continue
        c = np.linalg.solve(P, vecs[combo[4]])
        if np.min(np.abs(c)) < 1e-3:
            continue
        return np.linalg.inv(P * c)
    raise RuntimeError("rank-one factors do not span a projective frame")


def rationalize(U, V, W, max_den=64):
    ru, rv = _rank_one(U), _rank_one(V)
    X = _frame(_distinct([a for a, _ in ru]))
    Y = np.linalg.inv(_frame(_distinct([b for _, b in ru]))).T
    Z = np.linalg.inv(_frame(_distinct([b for _, b in rv]))).T
    U2 = (X @ U @ np.linalg.inv(Y)).reshape(48, 16)
    V2 = (Y @ V @ np.linalg.inv(Z)).reshape(48, 16)
    W2 = (Z @ W @ np.linalg.inv(X)).reshape(48, 16)
    for r in range(48):
        for F in (U2, V2):
            k = np.flatnonzero(np.abs(F[r]) > 1e-4 * np.abs(F[r]).max())[0]
            s = F[r, k]
            F[r] /= s
            W2[r] *= s
    mats = []
    for F in (U2, V2, W2):
        rows = [{c: Fraction(float(v)).limit_denominator(max_den) for c, v in enumerate(row) if abs(v) > 1e-6}
                for row in F]
        mats.append(SparseMatrix.from_rows(16, rows))
    return mats


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("source", nargs="?")
    ap.add_argument("-o", "--output", default="mm444_r48.json")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    source = Path(args.source) if args.source else Path(glob.glob(str(ROOT / DEFAULT_SOURCE))[0])
    U, V, W = extract(source)
    print("complex scheme error", brent_error(U, V, W))
    U, V, W = realify(U, V, W, args.seed)
    print("real scheme error", brent_error(U.reshape(48, 4, 4), V.reshape(48, 4, 4), W.reshape(48, 4, 4)))
    U, V, W = polish(U, V, W)
    print("polished error", brent_error(U, V, W))
    alg = BilinearAlgorithm((4, 4, 4), *rationalize(U, V, W), name="rational-444-48")
    alg, report = certify(alg, "exact")
    print("exact:", report.result, "brent:", verify_brent(alg))
    if not report.result:
        raise SystemExit("rounding did not give an exact algorithm")
    dens = sorted({v.denominator for X in (alg.U, alg.V, alg.W) for _, _, v in X.entries()})
    print("nnz", alg.U.nnz, alg.V.nnz, alg.W.nnz, "denominators", dens)
    io.save(alg, args.output)
    print("wrote", args.output)


if __name__ == "__main__":
    main()
