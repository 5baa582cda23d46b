"""Symbolic scalar curvature of the Bures-Wasserstein metric on SPD(2).

Builds the metric g_ij = tr(Gamma_S[E_j] E_i)/2 in coordinates (a, b, c) of
S = [[a, b], [b, c]], then Christoffel symbols, Ricci tensor and scalar
curvature from scratch, and compares against ``scalar_curvature`` (unordered
pair sum) and ``scalar_curvature_oracle(full=True)`` (ordered double sum).

Needs sympy (not a package dependency). Prints one line per test matrix.
"""
import numpy as np
import sympy as sp

from wscec.geometry import scalar_curvature, scalar_curvature_oracle

a, b, c = sp.symbols("a b c", real=True)
COORDS = [a, b, c]
S = sp.Matrix([[a, b], [b, c]])
BASIS = [sp.Matrix([[1, 0], [0, 0]]), sp.Matrix([[0, 1], [1, 0]]), sp.Matrix([[0, 0], [0, 1]])]


def gamma(Y):
    g11, g12, g22 = sp.symbols("g11 g12 g22")
    G = sp.Matrix([[g11, g12], [g12, g22]])
    M = S * G + G * S - Y
    sol = sp.solve([M[0, 0], M[0, 1], M[1, 1]], [g11, g12, g22], dict=True)[0]
    return G.subs(sol)


def symbolic_scalar_curvature():
    n = 3
    Gs = [gamma(E) for E in BASIS]
    g = sp.Matrix(n, n, lambda i, j: sp.simplify(sp.Rational(1, 2) * (Gs[j] * BASIS[i]).trace()))
    gi = sp.simplify(g.inv())
    chr_ = [[[sp.simplify(sum(gi[l, m] * (sp.diff(g[m, i], COORDS[j]) + sp.diff(g[m, j], COORDS[i])
                                         - sp.diff(g[i, j], COORDS[m])) for m in range(n)) / 2)
              for j in range(n)] for i in range(n)] for l in range(n)]

    def riemann(r, s, m, q):  # R^r_{s m q}
        e = sp.diff(chr_[r][q][s], COORDS[m]) - sp.diff(chr_[r][m][s], COORDS[q])
        return e + sum(chr_[r][m][l] * chr_[l][q][s] - chr_[r][q][l] * chr_[l][m][s] for l in range(n))

    ric = sp.Matrix(n, n, lambda s, q: sum(riemann(r, s, r, q) for r in range(n)))
    return sum(gi[i, j] * ric[i, j] for i in range(n) for j in range(n))


def main():
    sc = symbolic_scalar_curvature()
    for vals in [(1, 0, 1), (2, sp.Rational(1, 2), 1), (3, 1, 2)]:
        exact = sp.nsimplify(sp.simplify(sc.subs(dict(zip(COORDS, vals)))))
        M = np.array([[float(vals[0]), float(vals[1])], [float(vals[1]), float(vals[2])]])
        print(f"S={M.tolist()}: symbolic={exact} ({float(exact):.12g})  "
              f"ordered_sum={scalar_curvature_oracle(M, full=True):.12g}  "
              f"closed_form={scalar_curvature(M):.12g}")


if __name__ == "__main__":
    main()
