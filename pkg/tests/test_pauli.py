import numpy as np
import pytest

from ringqec.pauli import (
    CODES,
    LAFLAMME5,
    REP3,
    REP5,
    SHOR9,
    PauliString,
    StabilizerCode,
    block_extent,
    classify_neighboring_blocks,
    commutes,
    complete_stabilizer,
    correctable_set_check,
    identity,
    is_stabilizer_element,
    pauli_multiply,
    single,
    validate_generating_set,
)

RNG = np.random.default_rng(1234)


def random_pauli(n, rng=RNG):
    letters = "".join(rng.choice(list("IXYZ")) for _ in range(n))
    return PauliString(letters, int(rng.integers(0, 4)))


class TestMultiply:
    def test_single_qubit_xz(self):
        out = pauli_multiply(PauliString("X"), PauliString("Z"))
        assert out.letters == "Y" and out.phase == -1j

    def test_identity_neutral(self):
        p = PauliString("ZXXZI")
        out = pauli_multiply(identity(5), p)
        assert out == p

    def test_zz_product(self):
        out = pauli_multiply(PauliString("ZZI"), PauliString("ZIZ"))
        assert out.letters == "IZZ" and out.phase == 1

    def test_matches_matrix_product(self):
        for _ in range(30):
            a, b = random_pauli(3), random_pauli(3)
            got = pauli_multiply(a, b)
            assert np.allclose(got.matrix(), a.matrix() @ b.matrix())

    def test_associative(self):
        for _ in range(50):
            a, b, c = (random_pauli(4) for _ in range(3))
            assert pauli_multiply(a, pauli_multiply(b, c)) == \
                pauli_multiply(pauli_multiply(a, b), c)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            pauli_multiply(PauliString("XX"), PauliString("X"))


class TestCommutes:
    def test_examples(self):
        assert commutes(PauliString("ZZI"), PauliString("ZIZ"))
        assert not commutes(PauliString("X"), PauliString("Z"))

    def test_brute_force_count(self):
        # oracle: count positions that are both nontrivial and different
        a, b = PauliString("ZXXZI"), PauliString("XXZIZ")
        odd = sum(1 for x, y in zip(a.letters, b.letters)
                  if x != "I" and y != "I" and x != y)
        assert odd == 2
        assert commutes(a, b)

    def test_consistent_with_product(self):
        for _ in range(60):
            a, b = random_pauli(4), random_pauli(4)
            ab, ba = pauli_multiply(a, b), pauli_multiply(b, a)
            assert commutes(a, b) == (ab == ba)


class TestValidation:
    @pytest.mark.parametrize("code", [REP3, REP5, LAFLAMME5, SHOR9])
    def test_bundled_codes_valid(self, code):
        assert validate_generating_set(code).ok

    def test_anticommuting_pair_rejected(self):
        bad = StabilizerCode(2, (PauliString("XI"), PauliString("ZI")))
        report = validate_generating_set(bad)
        assert not report.ok and not report.commuting

    def test_dependent_set_rejected(self):
        bad = StabilizerCode(3, (PauliString("ZZI"), PauliString("IZZ"),
                                 PauliString("ZIZ")))
        report = validate_generating_set(bad)
        assert not report.independent


class TestBlockExtent:
    def test_interior_block(self):
        ext = block_extent(PauliString("IZXXZIIII"))
        assert (ext.L, ext.R) == (2, 5)

    def test_wrapping_block(self):
        ext = block_extent(PauliString("XZIIIIIZX"))
        assert (ext.L, ext.R) == (8, 2)

    def test_wrapping_five(self):
        ext = block_extent(PauliString("XXZIZ"))
        assert (ext.L, ext.R) == (5, 3)

    def test_not_one_block(self):
        assert block_extent(PauliString("ZIZII")) is None

    def test_all_identity_rejected(self):
        with pytest.raises(ValueError):
            block_extent(PauliString("III"))

    def test_random_one_block_strings(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            n = int(rng.integers(3, 10))
            start = int(rng.integers(1, n + 1))
            length = int(rng.integers(1, n))
            letters = ["I"] * n
            for k in range(length):
                letters[(start - 1 + k) % n] = rng.choice(["X", "Z"])
            ext = block_extent(PauliString("".join(letters)))
            assert ext is not None
            # brute-force: the covered positions equal the support
            assert set(ext.positions()) == set(
                i + 1 for i, c in enumerate(letters) if c != "I")


class TestClassification:
    def test_rep3_paper_order(self):
        cls = classify_neighboring_blocks(REP3)
        assert cls.ok and cls.order == (0, 1) and cls.conditions == (1,)

    def test_laflamme_all_adjacent(self):
        cls = classify_neighboring_blocks(LAFLAMME5)
        assert cls.ok and cls.order == (0, 1, 2, 3)
        assert cls.conditions == (1, 1, 1)

    def test_one_overlap(self):
        code = StabilizerCode(7, (PauliString("ZZZZIII"), PauliString("IIIZZZZ")))
        cls = classify_neighboring_blocks(code)
        assert cls.ok and cls.order == (0, 1) and cls.conditions == (2,)

    def test_two_overlap(self):
        code = StabilizerCode(6, (PauliString("ZZZZII"), PauliString("IIZZZZ")))
        cls = classify_neighboring_blocks(code)
        assert cls.ok and cls.order == (0, 1) and cls.conditions == (3,)

    def test_shor_needs_reordering(self):
        cls = classify_neighboring_blocks(SHOR9)
        assert cls.ok and len(cls.order) == 8
        assert all(c in (1, 2, 3) for c in cls.conditions)

    def test_rejects_non_block_generator(self):
        code = StabilizerCode(5, (PauliString("ZIZII"),))
        cls = classify_neighboring_blocks(code)
        assert not cls.ok

    def test_rejects_unchainable(self):
        # two distant blocks on a wide ring cannot satisfy any condition
        code = StabilizerCode(9, (PauliString("ZZIIIIIII"), PauliString("IIIIZZIII")))
        cls = classify_neighboring_blocks(code)
        assert not cls.ok


def _kl_numeric_oracle(errors, code):
    """Rank condition on projected error products, at the matrix level."""
    proj = np.eye(2 ** code.n, dtype=complex)
    for g in code.generators:
        proj = proj @ (np.eye(2 ** code.n) + g.matrix()) / 2
    tr_p = np.trace(proj).real
    for ej in errors:
        for ek in errors:
            m = proj @ ej.matrix().conj().T @ ek.matrix() @ proj
            lam = np.trace(m) / tr_p
            if np.max(np.abs(m - lam * proj)) > 1e-9:
                return False
    return True


class TestCorrectable:
    def test_paper_bitflip_set(self):
        errors = [identity(3), single(3, 1, "X"), single(3, 2, "X"), single(3, 3, "X")]
        ok, witness = correctable_set_check(errors, REP3)
        assert ok and witness is None

    def test_z_error_not_correctable(self):
        ok, witness = correctable_set_check([identity(3), single(3, 1, "Z")], REP3)
        assert not ok
        assert witness[2].letters == "ZII"

    def test_identity_only(self):
        ok, _ = correctable_set_check([identity(3)], REP3)
        assert ok

    def test_laflamme_single_qubit_errors(self):
        errors = [identity(5)]
        for q in range(1, 6):
            for c in "XYZ":
                errors.append(single(5, q, c))
        ok, _ = correctable_set_check(errors, LAFLAMME5, max_n=5)
        assert ok

    def test_size_limit(self):
        with pytest.raises(ValueError):
            correctable_set_check([identity(9)], SHOR9)

    def test_agrees_with_numeric_oracle(self):
        rng = np.random.default_rng(42)
        for _ in range(12):
            errors = [identity(3)]
            for _ in range(int(rng.integers(1, 4))):
                errors.append(single(3, int(rng.integers(1, 4)),
                                     str(rng.choice(["X", "Y", "Z"]))))
            got, _ = correctable_set_check(errors, REP3)
            assert got == _kl_numeric_oracle(errors, REP3)


class TestTextFormat:
    def test_round_trip(self):
        text = LAFLAMME5.to_text()
        back = StabilizerCode.from_text(text)
        assert back == LAFLAMME5

    def test_rejects_bad_letters(self):
        with pytest.raises(ValueError):
            StabilizerCode.from_text("n=3 name=x\nZZQ\n")

    def test_rejects_bad_length(self):
        with pytest.raises(ValueError):
            StabilizerCode.from_text("n=3\nZZ\n")

    def test_requires_header(self):
        with pytest.raises(ValueError):
            StabilizerCode.from_text("ZZI\nZIZ\n")


class TestCompletion:
    @pytest.mark.parametrize("code", [REP3, REP5, LAFLAMME5, SHOR9])
    def test_completion_commutes_and_independent(self, code):
        fixing = complete_stabilizer(code)
        assert len(fixing) == code.n - code.k
        extended = StabilizerCode(code.n, code.generators + tuple(fixing))
        assert validate_generating_set(extended).ok

    def test_stabilizer_membership(self):
        assert is_stabilizer_element(PauliString("IZZ"), REP3)
        assert not is_stabilizer_element(PauliString("ZII"), REP3)
        # sign matters: -IZZ is not in the group
        assert not is_stabilizer_element(PauliString("IZZ", 2), REP3)
