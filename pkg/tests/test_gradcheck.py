"""Tests for the finite-difference gradient audit."""

import numpy as np
import pytest

import handworked as hw
from sigcnn.errors import DomainError
from sigcnn.gradcheck import GradCheckReport, audit, grad_check, relative_error
from sigcnn.layers import ConvLayer, DenseLayer
from sigcnn.network import ConvBlock, DenseBlock, Network

from test_network import handworked_net, random_net


class TestRelativeError:
    def test_zero_below_floor(self):
        assert relative_error(0.0, 5e-11) == 0.0
        assert relative_error(1e-12, -1e-12) == 0.0
        # a diff at the central-difference noise scale reads as zero even
        # when the gradient itself is tiny, so the quotient cannot blow up
        assert relative_error(1.85e-5, 1.85e-5 + 9e-9) == 0.0
        assert relative_error(1.85e-5, 1.85e-5 + 2e-8) > 1e-4

    def test_ratio_above_floor(self):
        assert relative_error(2.0, 1.0) == 0.5
        assert relative_error(1.0, 2.0) == 0.5


class TestGradCheck:
    def test_handworked_network_passes(self):
        report = grad_check(handworked_net(), hw.X, hw.TARGET)
        assert isinstance(report, GradCheckReport)
        assert report.passed(1e-6)
        assert len(report.checks) == 24
        assert report.excluded == 0

    def test_random_deep_network_passes(self):
        # Draw until the sample sits away from rectifier kinks and dead
        # regions, so the audit scores real (non-zero) gradients.
        from sigcnn.network import forward

        rng = np.random.default_rng(78)
        net = random_net(77)
        while True:
            x = rng.normal(size=16)
            _, tape = forward(net, x)
            pre = np.concatenate(
                [t.pre_act.ravel() for t in tape.conv]
                + [t.pre_act.ravel() for t in tape.dense]
            )
            if np.min(np.abs(pre)) > 1e-4:
                break
        report = grad_check(net, x, [0.0, 1.0])
        assert report.passed(1e-6)
        # every probe lands within the noise floor, so there is no worst case
        assert report.max_rel_err == 0.0
        assert report.worst_path is None

    def test_leaky_rectifier_network_passes(self):
        rng = np.random.default_rng(79)
        net = Network(
            8,
            [
                ConvBlock(
                    ConvLayer(rng.normal(size=(3, 1, 3)), np.zeros(3)),
                    pool_width=3,
                    leaky_slope=0.01,
                )
            ],
            [DenseBlock(DenseLayer(rng.normal(size=(2, 6))))],
        )
        report = grad_check(net, rng.normal(size=8), [1.0, 0.0])
        assert report.passed(1e-6)

    def test_kink_adjacent_parameter_is_flagged_not_scored(self):
        # x puts the first pre-activation exactly at 0, so perturbing the
        # first tap flips the rectifier mask between the two probe points.
        net = Network(
            4,
            [ConvBlock(ConvLayer(np.array([[[0.0, 1.0]]]), np.zeros(1)))],
            [DenseBlock(DenseLayer(np.array([[1.0, 0.5, -0.5], [0.2, 0.1, 0.3]])))],
        )
        x = np.array([1.0, 0.0, 0.0, 0.0])  # first window pre-act = 0*1 + 1*0 = 0
        report = grad_check(net, x, [1.0, 0.0])
        flagged = {c.path for c in report.checks if c.excluded}
        assert "conv[0].weights[0][0][0]" in flagged
        for check in report.checks:
            if check.excluded:
                assert check.note == "kink-adjacent, excluded"
                assert check.rel_err is None

    def test_large_step_size_fails_audit(self):
        report = grad_check(handworked_net(), hw.X, hw.TARGET, h=1e-1)
        assert not report.passed(1e-6)

    def test_invalid_step_size(self):
        with pytest.raises(DomainError):
            grad_check(handworked_net(), hw.X, hw.TARGET, h=0.0)

    def test_paths_cover_every_parameter_exactly_once(self):
        net = random_net(81)
        report = grad_check(net, np.random.default_rng(82).normal(size=16), [1.0, 0.0])
        paths = [c.path for c in report.checks]
        assert len(paths) == len(set(paths)) == net.param_count()
        assert any(p.startswith("conv[0].weights") for p in paths)
        assert any(p.startswith("conv[1].bias") for p in paths)
        assert any(p.startswith("dense[1].weights") for p in paths)


class TestAudit:
    def test_aggregates_worst_case(self):
        rng = np.random.default_rng(90)
        cases = []
        for seed in (1, 2, 3):
            net = random_net(seed)
            cases.append((net, rng.normal(size=16), [1.0, 0.0]))
        max_rel, worst, reports = audit(cases)
        assert len(reports) == 3
        assert max_rel <= 1e-6
        assert worst is None  # all probes within the noise floor

    def test_coarse_step_names_worst_case(self):
        # a large step size produces real truncation error, which must
        # surface as a nonzero worst case with its "case <i>: <path>" label
        rng = np.random.default_rng(91)
        cases = [
            (random_net(seed), rng.normal(size=16), [1.0, 0.0])
            for seed in (1, 2, 3)
        ]
        max_rel, worst, reports = audit(cases, h=1e-2)
        assert max_rel > 1e-6
        assert worst is not None and worst.startswith("case ")
        case_idx = int(worst.split(":")[0].removeprefix("case "))
        assert reports[case_idx].worst_path == worst.split(": ", 1)[1]
