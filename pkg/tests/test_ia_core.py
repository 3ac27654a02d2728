import itertools

import numpy as np
import pytest

from iasim.channel import ChannelProfile, draw_channel, frequency_response
from iasim.errors import InfeasibleSubsetError
from iasim.ia_core import (
    Candidate,
    SystemConfig,
    UeLink,
    equivalent_channel,
    ia_rate,
    interference_null_space,
    precode_streams,
    qpsk_symbols,
    reduced_channel,
    schedule,
    stream_snrs,
    symbol_oracle,
    transmit_filter,
    ue_candidates,
    zf_and_alpha,
)
from iasim.numerics import hadamard_trunk

DEMO = SystemConfig(k=4, n_f=1, n_u=3, es=10.0, sigma2=1.0)


def make_candidate(user, vec, stream=0):
    row = np.asarray(vec, dtype=complex)
    return Candidate(user=user, stream=stream, c=row.conj(), g_row=row,
                     zero_gain=not np.any(row))


def random_links(rng, cfg, profile=ChannelProfile(num_taps=4, max_delay=3.0)):
    """Draw one realization of every user's channels and projections."""
    m_h = hadamard_trunk(cfg.k, cfg.n_s)
    links = []
    for _ in range(cfg.n_u):
        h_d = frequency_response(draw_channel(rng, profile), cfg.k)
        h_i = frequency_response(draw_channel(rng, profile), cfg.k)
        g_md = reduced_channel(h_d, m_h)
        g_mi = reduced_channel(h_i, m_h)
        links.append(UeLink(g_md=g_md, g_mi=g_mi, proj=interference_null_space(g_mi)))
    return links


def candidates_from_links(links):
    cands = []
    for u, link in enumerate(links):
        cands.extend(ue_candidates(u, equivalent_channel(link.proj, link.g_md)))
    return cands


class TestSystemConfig:
    def test_demo_dimensions(self):
        assert DEMO.n_s == 3

    def test_invalid(self):
        with pytest.raises(ValueError):
            SystemConfig(k=5)
        with pytest.raises(ValueError):
            SystemConfig(k=4, n_f=4)
        with pytest.raises(ValueError):
            SystemConfig(es=0.0)


class TestReducedChannel:
    def test_identity_channel(self):
        m_h = hadamard_trunk(4, 3)
        np.testing.assert_array_equal(reduced_channel(np.ones(4), m_h), m_h)

    def test_scalar_channel(self):
        m_h = hadamard_trunk(4, 3)
        np.testing.assert_allclose(reduced_channel(2.0 * np.ones(4), m_h), 2.0 * m_h)

    def test_rowwise_product(self):
        rng = np.random.default_rng(0)
        h = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        m_h = hadamard_trunk(4, 3)
        g = reduced_channel(h, m_h)
        for q in range(4):
            np.testing.assert_allclose(g[q], h[q] * m_h[q], atol=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            reduced_channel(np.ones(3), hadamard_trunk(4, 3))


class TestNullSpace:
    def test_canonical_basis(self):
        g_mi = np.eye(4, dtype=complex)[:, :3]
        proj = interference_null_space(g_mi)
        assert proj.v_perp.shape == (1, 4)
        np.testing.assert_allclose(np.abs(proj.v_perp), [[0, 0, 0, 1]], atol=1e-12)
        assert not proj.ambiguous

    def test_flat_interferer_orthocomplement(self):
        m_h = hadamard_trunk(4, 3)
        proj = interference_null_space(reduced_channel(np.ones(4), m_h))
        assert np.abs(proj.v_perp @ m_h).max() < 1e-10
        np.testing.assert_allclose(proj.v_perp @ proj.v_perp.conj().T, np.eye(1), atol=1e-10)

    def test_random_projection_residual(self):
        rng = np.random.default_rng(1)
        profile = ChannelProfile(num_taps=4, max_delay=3.0)
        for _ in range(300):
            h = frequency_response(draw_channel(rng, profile), 4)
            g_mi = reduced_channel(h, hadamard_trunk(4, 3))
            proj = interference_null_space(g_mi)
            scale = np.linalg.norm(g_mi)
            assert np.linalg.norm(proj.v_perp @ g_mi) <= 1e-9 * max(scale, 1.0)
            np.testing.assert_allclose(
                proj.v_perp @ proj.v_perp.conj().T, np.eye(1), atol=1e-10
            )

    def test_rank_deficient_flagged(self):
        col = np.array([1.0, 1j, 0.5, -0.25])[:, None]
        g_mi = np.hstack([col, 2 * col, 3 * col])
        proj = interference_null_space(g_mi)
        assert proj.ambiguous
        assert proj.v_perp.shape == (1, 4)

    def test_zero_interferer_canonical_completion(self):
        proj = interference_null_space(np.zeros((4, 3), dtype=complex))
        assert proj.ambiguous
        np.testing.assert_allclose(proj.v_perp, [[0, 0, 0, 1]], atol=1e-14)

    def test_interferer_content_independence(self):
        # projected interference is nil for ANY reduced-space input,
        # including the interferer's own strongest direction
        rng = np.random.default_rng(2)
        h = frequency_response(draw_channel(rng, ChannelProfile(4, 3.0)), 4)
        g_mi = reduced_channel(h, hadamard_trunk(4, 3))
        proj = interference_null_space(g_mi)
        _, _, vh = np.linalg.svd(g_mi)
        adversarial = [vh.conj().T[:, 0], vh.conj().T[:, -1], np.ones(3) / np.sqrt(3)]
        for x in adversarial:
            assert np.linalg.norm(proj.v_perp @ (g_mi @ x)) <= 1e-12 * np.linalg.norm(g_mi)


class TestEquivalentChannel:
    def test_selector_projection(self):
        rng = np.random.default_rng(3)
        g_md = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        proj = interference_null_space(np.eye(4, dtype=complex)[:, :3])
        # v_perp is e_4^H up to phase, so the equivalent channel is row 4 up to phase
        eq = equivalent_channel(proj, g_md)
        np.testing.assert_allclose(np.abs(eq[0]), np.abs(g_md[3]), atol=1e-12)

    def test_self_nulling(self):
        rng = np.random.default_rng(4)
        h = frequency_response(draw_channel(rng, ChannelProfile(4, 3.0)), 4)
        g = reduced_channel(h, hadamard_trunk(4, 3))
        eq = equivalent_channel(interference_null_space(g), g)
        assert np.abs(eq).max() < 1e-10

    def test_matches_direct_product(self):
        rng = np.random.default_rng(5)
        g_md = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        g_mi = rng.standard_normal((4, 3)) + 1j * rng.standard_normal((4, 3))
        proj = interference_null_space(g_mi)
        np.testing.assert_allclose(
            equivalent_channel(proj, g_md), proj.v_perp @ g_md, atol=1e-14
        )


class TestUeCandidates:
    def test_real_row(self):
        cands = ue_candidates(0, np.array([[1.0, 0.0, 0.0]]))
        np.testing.assert_array_equal(cands[0].c, [1.0, 0.0, 0.0])

    def test_conjugation(self):
        cands = ue_candidates(1, np.array([[1j, 0.0, 0.0]]))
        np.testing.assert_array_equal(cands[0].c, [-1j, 0.0, 0.0])
        assert cands[0].user == 1

    def test_norm_preserved(self):
        rng = np.random.default_rng(6)
        row = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        cands = ue_candidates(0, row[None, :])
        assert np.linalg.norm(cands[0].c) == pytest.approx(np.linalg.norm(row))

    def test_zero_row_flagged(self):
        cands = ue_candidates(0, np.zeros((2, 3)))
        assert all(c.zero_gain for c in cands)

    def test_stream_indices(self):
        g = np.eye(2, 3, dtype=complex)
        cands = ue_candidates(2, g)
        assert [c.stream for c in cands] == [0, 1]


class TestZfAndAlpha:
    def test_orthogonal_rows_alpha_one(self):
        rng = np.random.default_rng(7)
        q = np.linalg.qr(rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)))[0]
        scaled = q.conj().T * np.array([2.0, 0.5, 1.3])[:, None]
        subset = [make_candidate(i, scaled[i]) for i in range(3)]
        zf, alpha = zf_and_alpha(subset)
        np.testing.assert_allclose(alpha, 1.0, atol=1e-10)
        np.testing.assert_allclose(scaled @ zf, np.eye(3), atol=1e-9)

    def test_hand_computed_2x2(self):
        # rows (1,0) and (1,1)/sqrt(2): inverse is [[1,0],[-1,sqrt(2)]], alpha = (1/2, 1/2)
        g1 = np.array([1.0, 0.0])
        g2 = np.array([1.0, 1.0]) / np.sqrt(2.0)
        zf, alpha = zf_and_alpha([make_candidate(0, g1), make_candidate(1, g2)])
        np.testing.assert_allclose(zf, [[1.0, 0.0], [-1.0, np.sqrt(2.0)]], atol=1e-12)
        np.testing.assert_allclose(alpha, [0.5, 0.5], atol=1e-12)
        np.testing.assert_allclose(np.stack([g1, g2]) @ zf, np.eye(2), atol=1e-12)

    def test_identity_rows(self):
        subset = [make_candidate(i, np.eye(3)[i]) for i in range(3)]
        zf, alpha = zf_and_alpha(subset)
        np.testing.assert_allclose(zf, np.eye(3), atol=1e-12)
        np.testing.assert_allclose(alpha, 1.0, atol=1e-12)

    def test_wide_subset_right_inverse(self):
        rng = np.random.default_rng(8)
        rows = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
        subset = [make_candidate(i, rows[i]) for i in range(2)]
        zf, alpha = zf_and_alpha(subset)
        np.testing.assert_allclose(rows @ zf, np.eye(2), atol=1e-9)
        assert np.all(alpha <= 1.0 + 1e-12)
        # minimum-norm right inverse matches the pinv oracle
        np.testing.assert_allclose(zf, np.linalg.pinv(rows), atol=1e-9)

    def test_alpha_bounded_random(self):
        rng = np.random.default_rng(9)
        for _ in range(500):
            n_s = int(rng.integers(2, 5))
            n_rows = int(rng.integers(1, n_s + 1))
            rows = rng.standard_normal((n_rows, n_s)) + 1j * rng.standard_normal((n_rows, n_s))
            subset = [make_candidate(i, rows[i]) for i in range(n_rows)]
            zf, alpha = zf_and_alpha(subset)
            assert np.all(alpha <= 1.0 + 1e-12)
            assert np.all(alpha > 0.0)
            assert np.linalg.norm(rows @ zf - np.eye(n_rows)) <= 1e-9

    def test_dependent_rows_infeasible(self):
        g = np.array([1.0, 1j, 0.0])
        with pytest.raises(InfeasibleSubsetError):
            zf_and_alpha([make_candidate(0, g), make_candidate(1, g)])

    def test_too_many_rows(self):
        with pytest.raises(ValueError):
            zf_and_alpha([make_candidate(i, np.ones(2)) for i in range(3)])


class TestIaRate:
    def test_single_stream(self):
        assert ia_rate(np.array([1.0]), np.array([1.0])) == pytest.approx(1.0)

    def test_three_streams(self):
        assert ia_rate(np.ones(3), np.full(3, 3.0)) == pytest.approx(6.0)

    def test_mixed(self):
        got = ia_rate(np.array([0.5, 0.5]), np.array([10.0, 2.0]))
        assert got == pytest.approx(np.log2(6.0) + np.log2(2.0), abs=1e-12)


def oracle_best_rate(rows, cfg):
    """Independent scheduler: numpy pinv/svd based subset enumeration."""
    t = len(rows)
    for size in range(min(cfg.n_s, t), 0, -1):
        best = None
        for idx in itertools.combinations(range(t), size):
            g = np.stack([rows[i] for i in idx])
            s = np.linalg.svd(g, compute_uv=False)
            if s[-1] <= 0 or s[0] / s[-1] >= 1e10:
                continue
            zf = np.linalg.pinv(g)
            alpha = 1.0 / (np.sum(np.abs(g) ** 2, axis=1) * np.sum(np.abs(zf) ** 2, axis=0))
            snr = cfg.es * np.sum(np.abs(g) ** 2, axis=1) / cfg.sigma2
            rate = float(np.sum(np.log2(1.0 + alpha * snr)))
            if best is None or rate > best:
                best = rate
        if best is not None:
            return best
    raise AssertionError("oracle found no feasible subset")


class TestSchedule:
    def test_pool_equals_capacity_selects_all(self):
        rng = np.random.default_rng(10)
        links = random_links(rng, DEMO)
        cands = candidates_from_links(links)
        assert len(cands) == 3
        sel = schedule(cands, DEMO)
        assert sel.indices == (0, 1, 2)
        assert len(sel.chosen) == 3

    def test_selects_largest_orthogonal(self):
        # candidates 2*e1, e2, e3, 0.5*e1: subsets with both e1-aligned rows are
        # singular, so the contest is (0,1,2) vs (1,2,3); largest norms win
        e = np.eye(3)
        cands = [
            make_candidate(0, 2.0 * e[0]),
            make_candidate(1, e[1]),
            make_candidate(2, e[2]),
            make_candidate(3, 0.5 * e[0]),
        ]
        cfg = SystemConfig(k=4, n_f=1, n_u=4, es=1.0, sigma2=1.0)
        sel = schedule(cands, cfg)
        assert sel.indices == (0, 1, 2)
        assert sel.rate == pytest.approx(np.log2(5.0) + 2.0, abs=1e-12)
        np.testing.assert_allclose(sel.alpha, 1.0, atol=1e-12)

    def test_never_selects_identical_pair(self):
        cfg = SystemConfig(k=4, n_f=2, n_u=3, es=1.0, sigma2=1.0)
        g = np.array([1.0, 0.0])
        cands = [make_candidate(0, g), make_candidate(1, g), make_candidate(2, np.array([0.0, 1.0]))]
        sel = schedule(cands, cfg)
        assert sel.indices == (0, 2)  # lexicographic tie-break over (1, 2)

    def test_degrades_to_single_stream_when_collinear(self):
        g = np.array([0.5, 0.5j, -0.25])
        cands = [make_candidate(u, np.exp(1j * u) * g) for u in range(3)]
        sel = schedule(cands, DEMO)
        assert len(sel.chosen) == 1
        assert sel.indices == (0,)
        expected = np.log2(1.0 + DEMO.es * float(np.vdot(g, g).real) / DEMO.sigma2)
        assert sel.rate == pytest.approx(expected, rel=1e-12)

    def test_all_zero_candidates_raise(self):
        cands = [make_candidate(u, np.zeros(3)) for u in range(3)]
        with pytest.raises(InfeasibleSubsetError):
            schedule(cands, DEMO)

    def test_empty_pool_rejected(self):
        with pytest.raises(ValueError):
            schedule([], DEMO)

    def test_matches_oracle_on_random_instances(self):
        rng = np.random.default_rng(11)
        for _ in range(60):
            t = int(rng.integers(4, 9))
            n_s = int(rng.integers(2, 5))
            cfg = SystemConfig(k=8, n_f=8 - n_s, n_u=t, es=10.0, sigma2=1.0)
            rows = [rng.standard_normal(n_s) + 1j * rng.standard_normal(n_s) for _ in range(t)]
            cands = [make_candidate(i, rows[i]) for i in range(t)]
            sel = schedule(cands, cfg)
            assert sel.rate == pytest.approx(oracle_best_rate(rows, cfg), rel=1e-9)

    def test_selection_invariants(self):
        rng = np.random.default_rng(12)
        links = random_links(rng, DEMO)
        sel = schedule(candidates_from_links(links), DEMO)
        g_eff = np.stack([c.g_row for c in sel.chosen])
        np.testing.assert_allclose(g_eff @ sel.zf, np.eye(len(sel.chosen)), atol=1e-9)
        assert np.all(sel.alpha <= 1.0 + 1e-12)
        assert np.all(sel.alpha > 0.0)
        assert sel.rate >= 0.0
        np.testing.assert_array_equal(sel.p, g_eff.conj().T)


class TestPhaseInvariance:
    def test_unit_phase_leaves_outcome_unchanged(self):
        cfg = DEMO
        m_h = hadamard_trunk(cfg.k, cfg.n_s)
        profile = ChannelProfile(num_taps=4, max_delay=3.0)

        def run(h_ds, h_is):
            links = []
            for h_d, h_i in zip(h_ds, h_is):
                g_md = reduced_channel(h_d, m_h)
                g_mi = reduced_channel(h_i, m_h)
                links.append(UeLink(g_md, g_mi, interference_null_space(g_mi)))
            return schedule(candidates_from_links(links), cfg)

        rng = np.random.default_rng(13)
        h_ds = [frequency_response(draw_channel(rng, profile), cfg.k) for _ in range(cfg.n_u)]
        h_is = [frequency_response(draw_channel(rng, profile), cfg.k) for _ in range(cfg.n_u)]
        base = run(h_ds, h_is)
        rot_d = [h * np.exp(1j * 0.7 * (u + 1)) for u, h in enumerate(h_ds)]
        rot_i = [h * np.exp(-1j * 1.3 * (u + 1)) for u, h in enumerate(h_is)]
        rotated = run(rot_d, rot_i)
        assert rotated.indices == base.indices
        np.testing.assert_allclose(rotated.alpha, base.alpha, atol=1e-10)
        np.testing.assert_allclose(rotated.sinr, base.sinr, rtol=1e-10)
        assert rotated.rate == pytest.approx(base.rate, rel=1e-10)


class TestDegenerateCorrelation:
    def test_identical_channels_degrade_rate(self):
        cfg = DEMO
        m_h = hadamard_trunk(cfg.k, cfg.n_s)
        profile = ChannelProfile(num_taps=4, max_delay=3.0)

        def rate_for(seed, identical):
            rng = np.random.default_rng(seed)
            if identical:
                shared_d = frequency_response(draw_channel(rng, profile), cfg.k)
                shared_i = frequency_response(draw_channel(rng, profile), cfg.k)
                pairs = [(shared_d, shared_i)] * cfg.n_u
            else:
                pairs = [
                    (
                        frequency_response(draw_channel(rng, profile), cfg.k),
                        frequency_response(draw_channel(rng, profile), cfg.k),
                    )
                    for _ in range(cfg.n_u)
                ]
            links = []
            for h_d, h_i in pairs:
                g_mi = reduced_channel(h_i, m_h)
                links.append(UeLink(reduced_channel(h_d, m_h), g_mi, interference_null_space(g_mi)))
            return schedule(candidates_from_links(links), cfg).rate

        seeds = range(200)
        ident = np.median([rate_for(s, True) for s in seeds])
        iid = np.median([rate_for(s, False) for s in seeds])
        assert ident < iid


class TestPrecodeStreams:
    def test_trunk_application_exact(self):
        rng = np.random.default_rng(14)
        m_h = hadamard_trunk(4, 3)
        c = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        s = qpsk_symbols(rng, (3, 5))
        out = precode_streams(c, s, m_h)
        np.testing.assert_array_equal(out.tx, m_h @ out.x)
        np.testing.assert_allclose(out.x, c @ s, atol=1e-15)


class TestTransmitFilter:
    def test_per_stream_unit_columns(self):
        rng = np.random.default_rng(15)
        links = random_links(rng, DEMO)
        sel = schedule(candidates_from_links(links), DEMO)
        f = transmit_filter(sel, "per_stream")
        np.testing.assert_allclose(np.sum(np.abs(f) ** 2, axis=0), 1.0, atol=1e-12)

    def test_total_power_budget(self):
        rng = np.random.default_rng(16)
        links = random_links(rng, DEMO)
        sel = schedule(candidates_from_links(links), DEMO)
        f = transmit_filter(sel, "total")
        assert np.sum(np.abs(f) ** 2) == pytest.approx(len(sel.chosen), rel=1e-12)

    def test_unknown_mode(self):
        rng = np.random.default_rng(17)
        sel = schedule(candidates_from_links(random_links(rng, DEMO)), DEMO)
        with pytest.raises(ValueError):
            transmit_filter(sel, "equal")


class TestSymbolOracle:
    def _selection_and_links(self, seed):
        rng = np.random.default_rng(seed)
        links = random_links(rng, DEMO)
        sel = schedule(candidates_from_links(links), DEMO)
        return rng, sel, links

    def test_noiseless_no_interferer_double_nulling(self):
        rng, sel, links = self._selection_and_links(18)
        m = symbol_oracle(rng, sel, links, DEMO, 2000, es_interferer=0.0, sigma2=0.0)
        assert np.all(m.intra <= 1e-18 * m.desired)
        assert np.all(m.inter == 0.0)
        assert np.all(m.noise == 0.0)

    def test_interferer_content_nulled(self):
        rng, sel, links = self._selection_and_links(19)
        m = symbol_oracle(rng, sel, links, DEMO, 2000, es_interferer=50.0, sigma2=0.0)
        assert np.all(m.inter <= 1e-18 * m.desired)

    def test_measured_sinr_matches_analytic(self):
        rng, sel, links = self._selection_and_links(20)
        m = symbol_oracle(rng, sel, links, DEMO, 100_000)
        analytic = sel.alpha * sel.sinr
        np.testing.assert_allclose(m.sinr, analytic, rtol=0.03)

    def test_rejects_bad_symbol_count(self):
        rng, sel, links = self._selection_and_links(21)
        with pytest.raises(ValueError):
            symbol_oracle(rng, sel, links, DEMO, 0)


def test_stream_snrs_formula():
    cands = [make_candidate(0, np.array([1.0, 1.0, 0.0]))]
    snr = stream_snrs(cands, DEMO)
    assert snr[0] == pytest.approx(10.0 * 2.0 / 1.0)
