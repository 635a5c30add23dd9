import numpy as np

from usteen.f2core import BitMatrix, Subspace, rref
from usteen.fulu import (
    FuluModule,
    GradedSubspace,
    extend_scalars,
    extend_scalars_map,
    freeness_report,
    fulu_algebra,
    fulu_subquotient,
    generator_space,
    indecomposables,
    q_data,
    q_of_map,
    quotient_u_module,
    restrict_fulu,
    saturation_check,
    tensor_over_fulu,
)
from usteen.unstable import (
    free_unstable,
    map_from_free,
    module_from_action,
    polynomial_module,
    suspend,
    sym_lambda,
    tensor,
    unit_module,
)


def test_fulu_algebra_is_valid():
    fu = fulu_algebra(10)
    assert list(fu.dims) == [1] * 11
    assert fu.validate().ok


def test_extend_scalars_of_unit():
    E = extend_scalars(unit_module(8))
    assert list(E.dims) == [1] * 9
    assert E.validate().ok
    # matches the polynomial algebra as a u-module
    fu = fulu_algebra(8)
    for n in range(8):
        assert E.u_mat(n) == fu.u_mat(n)


def test_extend_scalars_of_suspension():
    E = extend_scalars(suspend(unit_module(7)))
    assert list(E.dims) == [0] + [1] * 8
    # Sq^1(u (x) s) = u^2 (x) s
    assert E.sq(1, 2).get(0, 0) == 1
    assert E.validate().ok


def test_extend_scalars_dims_convolution():
    F1 = free_unstable(1, 12)
    E = extend_scalars(F1)
    for n in range(13):
        assert E.dim(n) == sum(F1.dims[k] for k in range(n + 1))
    assert E.validate().ok


def test_indecomposables_of_algebra():
    Q = indecomposables(fulu_algebra(9))
    assert [Q.dim(n) for n in range(10)] == [1] + [0] * 9


def test_indecomposables_section():
    F2 = free_unstable(2, 10)
    E = extend_scalars(F2)
    Q = indecomposables(E)
    assert Q == F2


def test_q_naturality_on_random_maps():
    rng = np.random.default_rng(9)
    F2 = free_unstable(2, 9)
    H = polynomial_module(1, 9)
    EF, EH = extend_scalars(F2), extend_scalars(H)
    qf, qh = q_data(EF), q_data(EH)
    for _ in range(4):
        v = int(rng.integers(0, 1 << H.dim(2)))
        f = map_from_free(F2, H, v)
        ef = extend_scalars_map(f, EF, EH)
        assert ef.validate().ok
        qmap = q_of_map(ef, qf, qh)
        # Q(extension of f) agrees with f under the canonical identifications
        for n in range(10):
            assert qmap.mat(n) == f.mat(n)


def test_freeness_of_extension():
    rep = freeness_report(extend_scalars(free_unstable(2, 9)))
    assert rep.torsion_free.ok
    assert rep.free_basis is not None
    F2 = free_unstable(2, 9)
    assert rep.basis_dims == [F2.dim(n) for n in range(10)]


def test_torsion_fixture():
    # the truncated polynomial algebra on u with u^2 = 0
    mod = module_from_action("F[u]/(u^2)", 3, [1, 1, 0, 0], {(1, 0): BitMatrix.from_rows([[1]])})
    N = FuluModule(mod, {0: BitMatrix.from_rows([[1]])})
    rep = freeness_report(N)
    assert not rep.torsion_free.ok
    assert "degree 1" in rep.torsion_free.witness
    assert rep.free_basis is None


def test_saturation_of_extension_of_submodule():
    H = polynomial_module(1, 8)
    E = extend_scalars(H)
    # the scalar extension of the degree >= 1 part of H
    rows = {}
    for n in range(9):
        picked = []
        for a, off, _ in E.layout.blocks(n):
            if n - a >= 1:
                picked.extend(1 << (off + j) for j in range(H.dim(n - a)))
        rows[n] = picked
    X = GradedSubspace.from_vectors(E, rows)
    assert saturation_check(X).ok
    gs = generator_space(X)
    assert gs.eps_image_injective.ok


def test_u_multiple_not_saturated():
    E = extend_scalars(unit_module(6))
    # X = u * (whole module): miss the degree-0 generator
    rows = {1: [1 << E.index(1, 1, 0)]}
    X = GradedSubspace.from_vectors(E, rows)
    v = saturation_check(X)
    assert not v.ok
    assert "degree 0" in v.witness
    gs = generator_space(X)
    assert not gs.eps_image_injective.ok


def test_saturated_implies_quotient_torsion_free():
    H = polynomial_module(1, 8)
    E = extend_scalars(H)
    rows = {}
    for n in range(9):
        picked = []
        for a, off, _ in E.layout.blocks(n):
            if n - a >= 2:
                picked.extend(1 << (off + j) for j in range(H.dim(n - a)))
        rows[n] = picked
    X = GradedSubspace.from_vectors(E, rows)
    assert saturation_check(X).ok
    q = quotient_u_module(X)
    assert freeness_report(q).torsion_free.ok


def test_equiv_cond_randomized_small():
    rng = np.random.default_rng(5)
    H = polynomial_module(1, 7)
    E = extend_scalars(H)
    agree = 0
    for _ in range(25):
        seeds = {}
        for _pick in range(rng.integers(1, 3)):
            n = int(rng.integers(0, 7))
            if E.dim(n) == 0:
                continue
            v = int(rng.integers(1, 1 << E.dim(n)))
            seeds.setdefault(n, []).append(v)
        X = GradedSubspace.from_vectors(E, seeds)
        sat = saturation_check(X)
        gs = generator_space(X)
        assert sat.ok == gs.eps_image_injective.ok
        agree += 1
        if sat.ok:
            assert freeness_report(quotient_u_module(X)).torsion_free.ok
    assert agree == 25


def test_restrict_fulu_roundtrip():
    E = extend_scalars(free_unstable(1, 8))
    bases = {n: BitMatrix.identity(E.dim(n)) for n in range(9)}
    sub, incl = restrict_fulu(E, bases, "whole")
    assert sub.underlying.dims == E.dims
    assert incl.validate().ok


def test_fulu_subquotient_of_unit_embedding():
    M = free_unstable(1, 8)
    E = extend_scalars(M)
    # quotient by u * E: kernel of nothing; use the map u: E -> E shifted via
    # the inclusion of the sub u*E realized by restriction
    bases = {n: (E.u_mat(n - 1) if n >= 1 else BitMatrix.zeros(0, E.dim(0))) for n in range(9)}
    bases = {n: Subspace.from_rows(b).basis for n, b in bases.items()}
    sub, incl = restrict_fulu(E, bases, "uE")
    q = fulu_subquotient(incl)
    # cokernel is the indecomposables: isomorphic to M degreewise
    for n in range(9):
        assert q.cokernel.dim(n) == M.dim(n)


def test_tensor_over_fulu_unit():
    N = extend_scalars(free_unstable(2, 8))
    prod = tensor_over_fulu(fulu_algebra(8), N)
    assert list(prod.module.dims) == list(N.dims)
    assert prod.module.validate().ok


def test_tensor_over_fulu_of_extensions():
    M = free_unstable(1, 8)
    N = polynomial_module(1, 8)
    lhs = tensor_over_fulu(extend_scalars(M), extend_scalars(N))
    rhs = extend_scalars(tensor(M, N))
    assert list(lhs.module.dims) == list(rhs.dims)
    assert lhs.module.validate().ok


def test_tensor_over_fulu_free_basis():
    # free (x)_{F[u]} free is free with the product basis
    A = extend_scalars(unit_module(8))
    B = extend_scalars(suspend(unit_module(7)))
    prod = tensor_over_fulu(A, B)
    rep = freeness_report(prod.module)
    assert rep.torsion_free.ok
    assert rep.basis_dims is not None and sum(rep.basis_dims) == 1


def test_extension_functor_is_exact():
    # scalar extension of the invariants sequence stays degreewise exact
    sl = sym_lambda(8)
    inv, lam, phi_f1 = sl.invariants, sl.lambda2, sl.phi_f1
    E_inv = extend_scalars(inv)
    E_lam = extend_scalars(lam)
    E_phi = extend_scalars(phi_f1)
    incl = extend_scalars_map(
        sl.lambda2_incl, E_lam, E_inv
    )
    proj = extend_scalars_map(sl.diag, E_inv, E_phi)
    for n in range(9):
        ker = rref(incl.mat(n)).rank
        assert ker == E_lam.dim(n)  # injective
        img = Subspace.from_rows(incl.mat(n))
        from usteen.f2core import left_kernel

        assert img == left_kernel(proj.mat(n))  # exact in the middle
        assert rref(proj.mat(n)).rank == E_phi.dim(n)  # surjective


def test_fulu_validation_catches_broken_u():
    M = polynomial_module(1, 4)
    # u acting as zero violates nothing Cartan-wise only if Sq^1 u x = ...;
    # an identity u on a module where Sq1 does not match breaks the twist
    zero_u = {n: BitMatrix.zeros(1, 1) for n in range(4)}
    assert FuluModule(M, zero_u).validate().ok  # zero u is always compatible
    tmul_u = {n: BitMatrix.identity(1) for n in range(4)}
    assert FuluModule(M, tmul_u).validate().ok  # u acting as t is a valid structure
    # u*1 = t but u*t = 0 breaks Sq^1(u*1) = u*Sq^1(1) + u^2*1
    broken = {0: BitMatrix.identity(1)}
    rep = FuluModule(M, broken).validate()
    assert not rep.ok and any("Cartan" in v for v in rep.violations)
