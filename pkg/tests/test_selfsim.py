import numpy as np
import pytest

from dinfh.errors import LevelTooLarge
from dinfh.group import (
    GEN_A,
    GEN_T,
    GEN_TAU,
    GEN_U,
    IDENTITY,
    GroupElement,
    mul,
)
from dinfh.selfsim import (
    WreathElement,
    act_on_word,
    coverage_gap,
    eigenvalue_csv_lines,
    generator_wreath,
    level_matrix,
    pencil_level_eigs,
    spectrum_slice_intervals,
    validate_eigs_in_spectrum,
    wreath_mul,
)

GENS = {"a": GEN_A, "t": GEN_T, "tau": GEN_TAU}


# ---------------------------------------------------------------------------
# independent model: fold the defining binary-tree automata of the two
# product factors over generator *words* (never normal forms), with the
# letter pairing  letter = x + 2*y.  Elementary transitions:
#   a:   x -> 1 - x, restriction = empty word
#   t:   x -> x,     restriction = [a] at x = 0, [t] at x = 1
#   tau: y -> 1 - y, restriction = empty word


def _letter_step(gen, x):
    if gen == "a":
        return 1 - x, []
    if gen == "t":
        return x, (["a"] if x == 0 else ["t"])
    raise AssertionError(gen)


def _word_step(word, x):
    # (g1 .. gm)(x ...) applies gm first; (g h)|_x = g|_{h(x)} . h|_x
    restriction = []
    for gen in reversed(word):
        x, r = _letter_step(gen, x)
        restriction = r + restriction
    return x, restriction


def _binary_act(word, stream):
    out = []
    for x in stream:
        y, word = _word_step(word, x)
        out.append(y)
    return out


def _product_act(gen_word, word4):
    xs = [int(w) % 2 for w in word4]
    ys = [int(w) // 2 for w in word4]
    dihedral = [g for g in gen_word if g in ("a", "t")]
    n_tau = sum(1 for g in gen_word if g == "tau")
    xs2 = _binary_act(dihedral, xs)
    ys2 = list(ys)
    if n_tau % 2 and ys2:
        ys2[0] = 1 - ys2[0]
    return tuple(x + 2 * y for x, y in zip(xs2, ys2))


class TestWreath:
    def test_generator_a(self):
        wr = generator_wreath("a")
        assert wr.perm == (1, 0, 3, 2)
        assert all(r.is_identity() for r in wr.restrictions)

    def test_generator_t(self):
        wr = generator_wreath("t")
        assert wr.perm == (0, 1, 2, 3)
        assert wr.restrictions == (GEN_A, GEN_T, GEN_A, GEN_T)

    def test_generator_tau(self):
        wr = generator_wreath("tau")
        assert wr.perm == (2, 3, 0, 1)
        assert all(r.is_identity() for r in wr.restrictions)

    def test_a_squares_to_identity(self):
        wr = generator_wreath("a")
        assert wreath_mul(wr, wr).is_identity()

    def test_tau_times_a(self):
        prod = wreath_mul(generator_wreath("tau"), generator_wreath("a"))
        assert prod.perm == (3, 2, 1, 0)
        assert all(r.is_identity() for r in prod.restrictions)

    def test_t_squares_to_identity_deep(self):
        wr = generator_wreath("t")
        sq = wreath_mul(wr, wr)
        assert sq.is_identity()
        for depth in range(1, 6):
            word = (0, 1, 2, 3, 0)[:depth]
            assert act_on_word(mul(GEN_T, GEN_T), word) == tuple(word)


class TestAction:
    def test_a_moves_first_letter(self):
        assert act_on_word(GEN_A, (0, 2, 1)) == (1, 2, 1)
        assert act_on_word(GEN_A, "021") == (1, 2, 1)

    def test_tau_moves_first_letter(self):
        assert act_on_word(GEN_TAU, (0, 2)) == (2, 2)

    def test_t_acts_through_restriction(self):
        assert act_on_word(GEN_T, (0, 0)) == (0, 1)

    def test_rejects_bad_letters(self):
        with pytest.raises(ValueError):
            act_on_word(GEN_A, (0, 4))

    def test_against_product_model(self, rng):
        names = ["a", "t", "tau"]
        for _ in range(60):
            gen_word = [names[i] for i in rng.integers(0, 3, size=rng.integers(1, 8))]
            g = IDENTITY
            for s in gen_word:
                g = mul(g, GENS[s])
            word = tuple(int(x) for x in rng.integers(0, 4, size=rng.integers(1, 6)))
            assert act_on_word(g, word) == _product_act(gen_word, word)


class TestLevelMatrix:
    def test_a_level_1(self):
        assert level_matrix(GEN_A, 1).perm_vector.tolist() == [1, 0, 3, 2]

    def test_t_level_1_trivial(self):
        assert level_matrix(GEN_T, 1).perm_vector.tolist() == [0, 1, 2, 3]

    def test_t_level_2_blocks(self):
        vec = level_matrix(GEN_T, 2).perm_vector
        pi_a = level_matrix(GEN_A, 1).perm_vector
        pi_t = level_matrix(GEN_T, 1).perm_vector
        expect = np.concatenate(
            [0 + pi_a, 4 + pi_t, 8 + pi_a, 12 + pi_t]
        )
        assert np.array_equal(vec, expect)

    def test_t_level_2_bruteforce(self):
        vec = level_matrix(GEN_T, 2).perm_vector
        for idx in range(16):
            word = (idx // 4, idx % 4)
            image = act_on_word(GEN_T, word)
            assert vec[idx] == image[0] * 4 + image[1]

    def test_homomorphism(self, rng):
        gens = [GEN_A, GEN_T, GEN_TAU]
        for _ in range(30):
            g = IDENTITY
            h = IDENTITY
            for i in rng.integers(0, 3, size=6):
                g = mul(g, gens[i])
            for i in rng.integers(0, 3, size=6):
                h = mul(h, gens[i])
            for n in (1, 2, 3, 4):
                lg = level_matrix(g, n).perm_vector
                lh = level_matrix(h, n).perm_vector
                assert np.array_equal(level_matrix(mul(g, h), n).perm_vector, lg[lh])

    def test_involutions_and_commutation(self):
        for n in (1, 2, 3, 4):
            ident = np.arange(4**n)
            mats = {s: level_matrix(g, n).perm_vector for s, g in GENS.items()}
            for v in mats.values():
                assert np.array_equal(v[v], ident)
            assert np.array_equal(mats["a"][mats["tau"]], mats["tau"][mats["a"]])
            assert np.array_equal(mats["t"][mats["tau"]], mats["tau"][mats["t"]])

    def test_generators_distinct_at_level_4(self):
        vecs = [level_matrix(g, 4).perm_vector.tolist() for g in GENS.values()]
        assert vecs[0] != vecs[1] and vecs[0] != vecs[2] and vecs[1] != vecs[2]

    def test_rotation_order_grows(self):
        for n in (1, 2, 3, 4):
            vec = level_matrix(GEN_U, n).perm_vector
            ident = np.arange(4**n)
            order, cur = 1, vec
            while not np.array_equal(cur, ident):
                cur = vec[cur]
                order += 1
            assert order == 2**n
            assert order > 2 ** (n - 1)

    def test_short_words_act_faithfully_at_level_4(self):
        n = 4
        ident = np.arange(4**n)
        for k in range(-n, n + 1):
            for t_flag in (0, 1):
                for tau_flag in (0, 1):
                    g = GroupElement(k=k, t_flag=t_flag, tau_flag=tau_flag)
                    if g.is_identity():
                        continue
                    assert not np.array_equal(
                        level_matrix(g, n).perm_vector, ident
                    )

    def test_dump_format(self):
        lines = list(level_matrix(GEN_A, 1).dump_lines())
        assert lines[0] == "0 -> 1"
        assert lines[1] == "1 -> 0"


class TestLevelEigs:
    def test_commuting_involutions(self):
        eigs = pencil_level_eigs(1, 1, 1, 1)
        assert np.allclose(eigs, [-1, 1, 1, 3])

    def test_involution_spectrum(self):
        eigs = pencil_level_eigs(1, 0, 0, 3)
        assert np.allclose(np.abs(eigs), 1.0)

    def test_level_4_bound(self):
        eigs = pencil_level_eigs(1, 1, 0.5, 4)
        assert len(eigs) == 256
        assert eigs.min() >= -2.5 - 1e-12
        assert eigs.max() <= 2.5 + 1e-12

    def test_level_cap(self):
        with pytest.raises(LevelTooLarge):
            pencil_level_eigs(1, 1, 1, 7)

    def test_nesting(self):
        prev = np.sort(pencil_level_eigs(1, 1, 0.5, 1))
        for n in (2, 3, 4):
            cur = np.sort(pencil_level_eigs(1, 1, 0.5, n))
            idx = np.clip(np.searchsorted(cur, prev), 1, len(cur) - 1)
            dist = np.minimum(np.abs(cur[idx] - prev), np.abs(prev - cur[idx - 1]))
            assert dist.max() <= 1e-9
            prev = cur


class TestValidation:
    def test_top_eigenvalue_witness(self):
        out = validate_eigs_in_spectrum(1, 1, 1, 1)
        assert out["violations"] == []
        assert out["max_margin"] <= 1e-10

    def test_level_5_clean(self):
        out = validate_eigs_in_spectrum(1, 1, 0.5, 5)
        assert out["violations"] == []

    def test_degenerate_branch(self):
        out = validate_eigs_in_spectrum(1, 0, 0, 2)
        assert out["violations"] == []

    def test_alternative_tau_automaton(self):
        base = validate_eigs_in_spectrum(1, 1, 0.5, 3)
        alt = validate_eigs_in_spectrum(1, 1, 0.5, 3, tau_with_restrictions=True)
        assert base["violations"] == alt["violations"] == []
        # the two automata differ as permutations but generate the same group
        assert not np.array_equal(
            level_matrix(GEN_TAU, 2).perm_vector,
            level_matrix(GEN_TAU, 2, tau_with_restrictions=True).perm_vector,
        )


class TestCoverage:
    def test_slice_intervals(self):
        assert spectrum_slice_intervals(1, 1, 0.5) == [(-2.5, 2.5)]
        assert spectrum_slice_intervals(1, 0, 0) == [(-1.0, -1.0), (1.0, 1.0)]

    def test_monotone_refinement(self):
        g2 = coverage_gap(1, 1, 0.5, 2)
        g3 = coverage_gap(1, 1, 0.5, 3)
        assert g3 < g2

    def test_level_5_coverage(self):
        assert coverage_gap(1, 1, 0.5, 5) < 0.5

    def test_involution_attains_slice(self):
        for n in (1, 2, 3):
            assert coverage_gap(1, 0, 0, n) == pytest.approx(0.0, abs=1e-12)

    def test_csv_header(self):
        lines = list(eigenvalue_csv_lines(1, 1, 1, 1))
        assert lines[0] == "level,z1,z2,z3,lambda,multiplicity_hint"
        # eigenvalues -1, 1 (x2), 3
        assert len(lines) == 4
        assert lines[2].endswith(",2")
