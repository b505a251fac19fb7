"""Acceptance criteria; the terminal summary prints one PASS/FAIL line per criterion."""
import itertools
import subprocess
import sys

import pytest

from qsum import harness as h
from qsum.cyclotome import CycloContext
from qsum.identities import (
    ConjectureParams, TheoremParams, clearing_factor, enumerate_compositions, rotate_composition, rotation_map,
    summand_theorem, verify_conjecture, verify_theorem,
)
from qsum.proofsteps import verify_1psi1_special
from qsum.qcore import QFactored, qf_expand
from qsum.qseries import TruncSeries, n_section, n_section_by_roots


def statuses(cases):
    reps = list(h.execute(cases, 1))
    return reps, {r.status for r in reps}


@pytest.mark.criterion(1, "summation theorem: n<=4, M1,M2<=6, every S")
def test_theorem_sweep():
    reps, seen = statuses(h.sweep_cases(h.SweepSpec("theorem")))
    assert len(reps) == 1372 and seen == {"pass"}


@pytest.mark.criterion(2, "conjecture: n,m<=3, M1,M2<=4, every S1,S2")
def test_conjecture_sweep():
    reps, seen = statuses(h.sweep_cases(h.SweepSpec("conjecture")))
    assert len(reps) == 6525
    assert all(r.witness for r in reps if r.status == "fail")
    assert seen == {"pass"}


@pytest.mark.criterion(3, "conjecture at m=1 reduces to the theorem")
def test_m1_degeneration():
    for n, M1, M2 in itertools.product(range(1, 4), range(5), range(5)):
        for S1, S2 in itertools.product(range(-M1, M2 + 1), repeat=2):
            assert verify_conjecture(ConjectureParams(n, 1, M1, M2, S1, S2)).passed
            assert verify_conjecture(ConjectureParams(1, n, M1, M2, S2, S1)).passed


@pytest.mark.criterion(4, "multidimensional Watson transformation: l<=3, N_i<=2, 25 points each")
def test_milne_watson():
    cases = h.sweep_cases(h.SweepSpec("milne"))
    reps, seen = statuses(cases)
    assert seen == {"pass"}
    per_config = {}
    for (_, (l, N, _, _)), rep in zip(cases, reps):
        per_config[(l, N)] = per_config.get((l, N), 0) + rep.passed
    assert len(per_config) == 3 + 9 + 27 and min(per_config.values()) >= 25


@pytest.mark.criterion(5, "determinant lemma: sizes 1-6, 10 instances each")
def test_det_lemma():
    reps, seen = statuses(h.sweep_cases(h.SweepSpec("detlemma")))
    assert len(reps) == 60 and seen == {"pass"}


@pytest.mark.criterion(6, "cyclotomic products for n = 2..12")
def test_cyclo_products():
    reps, seen = statuses(h.sweep_cases(h.SweepSpec("cyclo")))
    assert len(reps) == 11 and seen == {"pass"}


# steps whose derivation does not apply outside a domain guard
GUARDED = {"milne-lim", "eq4", "cancel"}


@pytest.mark.criterion(7, "proof chain on (2,2,2), (2,4,2), (3,3,3), (3,6,3)")
@pytest.mark.parametrize("n,M1,M2", [(2, 2, 2), (2, 4, 2), (3, 3, 3), (3, 6, 3)])
def test_proofchain(n, M1, M2):
    reps, _ = statuses(h.proofchain_cases(n, M1, M2))
    assert [r.case_name for r in reps] == list(h.PROOFCHAIN_STEPS)
    for r in reps:
        assert r.status == "pass" or (r.status == "indeterminate" and r.case_name in GUARDED and r.witness), r


@pytest.mark.criterion(8, "bilateral summation at integer-power specializations")
@pytest.mark.parametrize("N,B,Z,ell,n,T", [(0, 1, 1, 0, 2, 8), (2, 1, 1, 0, 2, 12), (2, 2, 1, 1, 3, 12)])
def test_psi1(N, B, Z, ell, n, T):
    rep = verify_1psi1_special(N, B, Z, ell, CycloContext(n), T)
    assert rep.passed and f"T={T}" in rep.params


@pytest.mark.criterion(9, "property suites: support, rotation, clearing factor, n-section")
def test_properties():
    for n, M1, M2 in itertools.product(range(1, 5), range(4), range(4)):
        F = clearing_factor(n, M1, M2)
        for S in range(-M1, M2 + 1):
            p = TheoremParams(n, M1, M2, S)
            inside = set(enumerate_compositions(p))
            # support: everything outside the box vanishes
            for head in itertools.product(range(-3, 4), repeat=n - 1):
                k = head + (S - sum(head),)
                if k not in inside:
                    assert summand_theorem(p, k).is_zero
            # clearing factor: every summand becomes a Laurent polynomial
            for k in inside:
                qf_expand(F * summand_theorem(p, k))
            # rotation: termwise match with the S = 0 identity at (M1+S, M2-S)
            p0 = TheoremParams(n, M1 + S, M2 - S, 0)
            rot = rotation_map(n, S)
            shift = QFactored.monomial((n + 1) * S * (S + 1) // 2)
            images = {}
            for k in enumerate_compositions(p0):
                k2 = rotate_composition(k, rot)
                assert summand_theorem(p, k2) == shift * summand_theorem(p0, k)
                images[k2] = k
            assert set(images) == inside
            assert verify_theorem(p).passed == verify_theorem(p0).passed
    # n-section: filter agrees with the root-of-unity average
    for n in range(2, 8):
        ctx = CycloContext(n)
        f = TruncSeries({e: (e * e + 3 * e) % 7 - 3 for e in range(25)}, 24)
        for r in range(n):
            assert n_section_by_roots(f, ctx, r).agree(n_section(f, n, r)) == (True, 24)


@pytest.mark.criterion(10, "determinism: repeated runs and --jobs give identical output")
def test_determinism():
    args = [sys.executable, "-m", "qsum", "sweep", "theorem", "--n", "1:3", "--m1", "0:3", "--m2", "0:3"]
    runs = [subprocess.run(args + ["--jobs", j], capture_output=True, timeout=600) for j in ("1", "1", "2", "4")]
    assert all(r.returncode == 0 for r in runs)
    assert len({r.stdout for r in runs}) == 1 and runs[0].stdout
