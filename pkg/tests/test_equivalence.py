import numpy as np
import numpy.testing as npt
import pytest

from semidecay import generate_instance
from semidecay.equivalence import (DecayCertificate, verify_decay_from_resolvent,
                                   verify_resolvent_from_decay)
from semidecay.errors import CertificateError
from semidecay.hypotheses import FAIL, PASS, check_h1
from semidecay.spaces import WeightedSpace


def diag_report():
    return check_h1(np.diag([0.0, -1.0]), a=-0.9, r=0.25)


class TestDecayFromResolvent:
    def test_two_point_pass(self):
        t_mat = np.diag([0.0, -1.0])
        report = diag_report()
        space = WeightedSpace.unweighted(2)
        transfer = verify_decay_from_resolvent(t_mat, space, report.spectral, -0.9)
        assert transfer.verdict == PASS
        assert transfer.fitted_rate == pytest.approx(-1.0, abs=1e-6)
        # the deflated propagator is exactly e^{-t} on the second mode
        npt.assert_allclose(transfer.deviation_norms,
                            np.exp(-transfer.t_grid), rtol=1e-9)

    def test_rate_below_true_decay_fails(self):
        t_mat = np.diag([0.0, -1.0])
        report = diag_report()
        space = WeightedSpace.unweighted(2)
        transfer = verify_decay_from_resolvent(t_mat, space, report.spectral, -1.1)
        assert transfer.verdict == FAIL

    def test_transient_growth_passes_with_large_prefactor(self):
        t_mat = np.array([[-1.0, 10.0], [0.0, -2.0]])
        space = WeightedSpace.unweighted(2)
        # k=0 configuration: no surviving modes above a=-0.95, so the
        # undeflated semigroup norm itself must obey the envelope
        report0 = check_h1(t_mat, a=-0.95, r=0.01)
        assert report0.spectral.discrete_eigs == []
        transfer = verify_decay_from_resolvent(t_mat, space, report0.spectral, -0.9)
        assert transfer.verdict == PASS
        assert transfer.fitted_rate == pytest.approx(-1.0, abs=0.05)
        assert transfer.prefactor_at_rate > 1.0


class TestResolventFromDecay:
    def test_two_point_certificate_passes(self):
        t_mat = np.diag([0.0, -1.0])
        space = WeightedSpace.unweighted(2)
        cert = DecayCertificate(level=-1.0, prefactor=1.0,
                                discrete_eigs=[0.0 + 0.0j],
                                projectors=[np.diag([1.0, 0.0])], space=space)
        report = verify_resolvent_from_decay(t_mat, space, cert)
        assert report.verdict == PASS
        assert report.laplace_max_ratio <= 1.0 + 1e-6
        assert report.h1.verdict == PASS
        assert np.isfinite(report.h2.bound)

    def test_wrong_projector_rejected_by_laplace_bound(self):
        # commutes with the diagonal semigroup but misattributes the modes
        t_mat = np.diag([0.0, -1.0])
        space = WeightedSpace.unweighted(2)
        cert = DecayCertificate(level=-1.0, prefactor=1.0,
                                discrete_eigs=[0.0 + 0.0j],
                                projectors=[np.diag([0.0, 1.0])], space=space)
        report = verify_resolvent_from_decay(t_mat, space, cert)
        assert report.verdict == FAIL
        assert "Laplace" in report.witness

    def test_noncommuting_projector_rejected_outright(self):
        t_mat = np.diag([0.0, -1.0])
        space = WeightedSpace.unweighted(2)
        cert = DecayCertificate(level=-1.0, prefactor=1.0,
                                discrete_eigs=[0.0 + 0.0j],
                                projectors=[np.array([[1.0, 1.0], [0.0, 0.0]])],
                                space=space)
        with pytest.raises(CertificateError):
            verify_resolvent_from_decay(t_mat, space, cert)

    def test_round_trip_on_random_normal_instances(self, rng):
        for _ in range(8):
            lams = np.concatenate([[0.0], rng.uniform(-3.0, -1.0, 5)])
            q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
            t_mat = q @ np.diag(lams) @ q.T
            space = WeightedSpace.unweighted(6)
            h1 = check_h1(t_mat, a=-0.5, r=0.2)
            assert h1.verdict == PASS
            transfer = verify_decay_from_resolvent(t_mat, space, h1.spectral, -0.4)
            assert transfer.verdict == PASS
            converse = verify_resolvent_from_decay(t_mat, space, transfer.certificate)
            assert converse.verdict == PASS


def test_round_trip_on_generated_instances():
    """Laplace bound holds with slack at a level slightly above the abscissa."""
    for seed in (2, 9, 31):
        inst = generate_instance(seed, 10)
        cert = inst.certificate
        restricted = inst.split.restricted(inst.pair)
        h1 = check_h1(restricted, cert.a, cert.r, expected_k=1)
        assert h1.verdict == PASS
        ambient_op = inst.split.ambient_operator(inst.pair)
        transfer = verify_decay_from_resolvent(ambient_op, inst.pair.ambient,
                                               h1.spectral, 0.5 * cert.a)
        assert transfer.verdict == PASS
        converse = verify_resolvent_from_decay(ambient_op, inst.pair.ambient,
                                               transfer.certificate)
        assert converse.verdict == PASS
        assert converse.laplace_max_ratio <= 1.0 + 1e-6
