import configparser
import math
from pathlib import PurePosixPath

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from crystal.presets import build_preset
from database import DATA_DIR
from errors import ConfigError, InputError, SingularityError
from hyperfine.fixture import DEFAULT_FIXTURE, load_fixture, resolve_a_iso, select
from hyperfine.inversion import fit_geometry
from hyperfine.isotopes import ISOTOPES, dipolar_prefactor, isotope
from hyperfine.scan import db_spin_center, scan_structure
from hyperfine.tensors import (HyperfineTensor, SpinCenter, dipolar_constant, dipolar_tensor, forward_ab,
                               principal_values, secular_couplings, total_tensor)

from conftest import DB_HOST

H1 = ISOTOPES["1H"]
C13 = ISOTOPES["13C"]
MAGIC = math.degrees(math.acos(1 / math.sqrt(3)))
ORIGIN = SpinCenter.single((0.0, 0.0, 0.0))


def _tensor_path(r, theta, a_iso, spec):
    th = math.radians(theta)
    nucleus = (r * math.sin(th), 0.0, r * math.cos(th))
    return secular_couplings(total_tensor(dipolar_tensor(ORIGIN, nucleus, spec), a_iso), (0, 0, 1))


def _axial(t):
    return HyperfineTensor(((-t, 0.0, 0.0), (0.0, -t, 0.0), (0.0, 0.0, 2 * t)), 0.0)


class TestConstants:
    def test_dipolar_prefactors(self):
        # (mu0/4pi) h gamma_e gamma_n, by hand
        by_hand_1h = 1e-7 * 6.62607015e-34 * 28024.9514e6 * 42.577478e6 / 1e-30 / 1e6
        assert H1.dipolar_constant == pytest.approx(by_hand_1h, rel=1e-12)
        assert H1.dipolar_constant == pytest.approx(79.07, rel=1e-3)
        assert C13.dipolar_constant == pytest.approx(19.89, rel=1e-3)
        assert dipolar_prefactor(C13.gamma) == C13.dipolar_constant

    def test_unknown_isotope(self):
        with pytest.raises(InputError):
            isotope("17O")


class TestDipolarTensor:
    @pytest.mark.parametrize("spec, t", [(H1, 79.07), (C13, 19.89)])
    def test_nucleus_on_the_z_axis(self, spec, t):
        tensor = dipolar_tensor(ORIGIN, (0.0, 0.0, 1.0), spec)
        assert np.diag(tensor) == pytest.approx([-t, -t, 2 * t], rel=1e-3)
        assert np.count_nonzero(tensor - np.diag(np.diag(tensor))) == 0

    def test_two_sites_average(self):
        center = SpinCenter((((0.0, 0.0, 0.5), 0.5), ((0.0, 0.0, -0.5), 0.5)))
        nucleus = (1.0, 0.3, 0.0)
        expected = 0.5 * (dipolar_tensor(SpinCenter.single((0, 0, 0.5)), nucleus, H1)
                          + dipolar_tensor(SpinCenter.single((0, 0, -0.5)), nucleus, H1))
        assert dipolar_tensor(center, nucleus, H1) == pytest.approx(expected, abs=1e-12)

    def test_eigenvalues(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            nucleus = rng.normal(size=3) * 2
            t = dipolar_constant(float(np.linalg.norm(nucleus)), H1)
            values = principal_values(dipolar_tensor(ORIGIN, nucleus, H1))
            assert values == pytest.approx([2 * t, -t, -t], rel=1e-10)

    def test_nucleus_on_the_spin_site(self):
        with pytest.raises(SingularityError):
            dipolar_tensor(ORIGIN, (0.0, 0.0, 0.05), H1)

    def test_populations_must_sum_to_one(self):
        with pytest.raises(InputError):
            SpinCenter((((0.0, 0.0, 0.0), 0.6), ((1.0, 0.0, 0.0), 0.6)))


class TestTensorSymmetries:
    center = SpinCenter((((0.1, -0.2, 0.3), 0.7), ((-0.4, 0.5, 0.1), 0.3)))

    def _couplings(self, center, nucleus, field, a_iso=3.0):
        return secular_couplings(total_tensor(dipolar_tensor(center, nucleus, H1), a_iso), field)

    def test_joint_rotation_keeps_couplings(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            nucleus = rng.uniform(1.0, 5.0, 3) * rng.choice([-1.0, 1.0], 3)
            field = rng.normal(size=3)
            rot = Rotation.random(random_state=rng)
            before = self._couplings(self.center, nucleus, field)
            after = self._couplings(self.center.moved(rot.apply), rot.apply(nucleus), rot.apply(field))
            assert (after.a, after.b) == pytest.approx((before.a, before.b), rel=1e-9, abs=1e-9)

    def test_distance_scaling(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            nucleus = rng.uniform(0.5, 4.0, 3)
            scale = rng.uniform(0.5, 3.0)
            base = dipolar_tensor(ORIGIN, nucleus, C13)
            assert np.allclose(dipolar_tensor(ORIGIN, scale * nucleus, C13), base / scale ** 3,
                               rtol=1e-12, atol=1e-12)

    def test_reversed_field(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            nucleus = rng.uniform(1.0, 5.0, 3)
            field = rng.normal(size=3)
            a_iso = rng.uniform(-5.0, 5.0)
            forward = self._couplings(self.center, nucleus, field, a_iso)
            backward = self._couplings(self.center, nucleus, -field, a_iso)
            assert backward.b == pytest.approx(forward.b, rel=1e-12)
            assert backward.a == pytest.approx(forward.a, rel=1e-12)


class TestTotalTensor:
    def test_isotropic_only(self):
        assert total_tensor(np.zeros((3, 3)), 5.0).matrix == pytest.approx(5.0 * np.eye(3))

    def test_shifted_eigenvalues(self):
        values = principal_values(total_tensor(np.diag([-79.07, -79.07, 158.14]), 10.0))
        assert values == pytest.approx([168.14, -69.07, -69.07])

    def test_rejects_traced_part(self):
        with pytest.raises(InputError):
            total_tensor(np.eye(3), 0.0)


class TestSecularCouplings:
    def test_field_along_axis(self):
        pair = secular_couplings(_axial(79.07), (0, 0, 1))
        assert pair.a == pytest.approx(2 * 79.07)
        assert pair.b == pytest.approx(0.0, abs=1e-12)

    def test_magic_angle(self):
        th = math.radians(MAGIC)
        pair = secular_couplings(_axial(79.07), (math.sin(th), 0.0, math.cos(th)))
        assert pair.a == pytest.approx(0.0, abs=1e-8)

    def test_forty_five_degrees(self):
        pair = secular_couplings(_axial(79.07), (1.0, 0.0, 1.0))
        assert (pair.a, pair.b) == pytest.approx((39.535, 118.605))

    def test_zero_field(self):
        with pytest.raises(InputError):
            secular_couplings(_axial(1.0), (0, 0, 0))


class TestForward:
    def test_limits(self):
        t = dipolar_constant(2.0, H1)
        assert forward_ab(2.0, 0.0, 0.0, H1).a == pytest.approx(2 * t)
        pair = forward_ab(2.0, 90.0, 0.0, H1)
        assert (pair.a, pair.b) == pytest.approx((-t, 0.0), abs=1e-12)

    def test_oh_proton_shadow(self):
        pair = forward_ab(3.16, 18.0, 0.0, H1)
        assert (pair.a, pair.b) == pytest.approx((4.29, 2.21), abs=0.01)

    def test_matches_tensor_path(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            r, theta, a_iso = rng.uniform(1, 6), rng.uniform(0, 90), rng.uniform(-10, 10)
            closed = forward_ab(r, theta, a_iso, H1)
            tensor = _tensor_path(r, theta, a_iso, H1)
            assert closed.a == pytest.approx(tensor.a, abs=1e-9)
            assert closed.b == pytest.approx(tensor.b, abs=1e-9)

    def test_bad_input(self):
        with pytest.raises(SingularityError):
            forward_ab(0.05, 10.0, 0.0, H1)
        with pytest.raises(InputError):
            forward_ab(2.0, 120.0, 0.0, H1)


def _grid_oracle(a, b, spec):
    """Brute-force (r, theta) minimizing the coupling mismatch, refined to 1e-3"""
    def search(rs, ths):
        r, th = np.meshgrid(rs, ths, indexing="ij")
        t = spec.dipolar_constant / r ** 3
        c, s = np.cos(np.radians(th)), np.sin(np.radians(th))
        cost = np.maximum(abs(t * (3 * c * c - 1) - a), abs(3 * t * s * c - b))
        i, j = np.unravel_index(np.argmin(cost), cost.shape)
        return rs[i], ths[j]

    r0, th0 = search(np.arange(1.0, 6.0, 0.01), np.arange(0.0, 90.0, 0.1))
    return search(np.arange(r0 - 0.02, r0 + 0.02, 1e-3), np.arange(th0 - 0.2, th0 + 0.2, 1e-3))


class TestFit:
    def test_oh_proton(self):
        solutions = fit_geometry(4.3, 2.2, 0.0, H1)
        assert len(solutions) == 1
        best = solutions[0]
        assert best.r == pytest.approx(3.16, abs=0.01)
        assert best.theta == pytest.approx(18.0, abs=0.5)
        r, theta = _grid_oracle(4.3, 2.2, H1)
        assert best.r == pytest.approx(r, abs=2e-3)
        assert best.theta == pytest.approx(theta, abs=2e-3)
        assert best.residual < 1e-9

    def test_axial_inversion(self):
        best = fit_geometry(2 * H1.dipolar_constant, 0.0, 0.0, H1)[0]
        assert (best.r, best.theta) == pytest.approx((1.0, 0.0))

    def test_round_trip(self):
        pair = forward_ab(2.5, 37.0, 1.0, H1)
        best = fit_geometry(pair.a, pair.b, 1.0, H1)[0]
        assert best.r == pytest.approx(2.5, rel=1e-6)
        assert best.theta == pytest.approx(37.0, rel=1e-6)

    def test_round_trip_sweep(self):
        rng = np.random.default_rng(5)
        checked = 0
        while checked < 50:
            r, theta = rng.uniform(1, 6), rng.uniform(1, 89)
            if abs(theta - MAGIC) < 0.5:
                continue
            pair = forward_ab(r, theta, 0.0, C13)
            best = fit_geometry(pair.a, pair.b, 0.0, C13)[0]
            assert best.r == pytest.approx(r, rel=1e-6)
            assert best.theta == pytest.approx(theta, rel=1e-6)
            checked += 1

    def test_no_dipolar_part(self):
        assert fit_geometry(3.0, 0.0, 3.0, H1) == []

    def test_negative_b(self):
        with pytest.raises(InputError):
            fit_geometry(1.0, -0.5, 0.0, H1)


class TestFixture:
    def test_shipped_values(self):
        fixture = load_fixture()
        assert fixture.lobe_offset == pytest.approx(0.6446)
        assert fixture.a_iso["db-host"] == 329.0
        assert fixture.with_alternatives().a_iso["db-host"] == 337.0
        assert fixture.quoted["db-host:text"] == (329.0, 105.0)

    def test_data_files_are_package_data(self, repo_root):
        assert DEFAULT_FIXTURE.is_file()
        assert DEFAULT_FIXTURE.parent == DATA_DIR
        setup = configparser.ConfigParser()
        setup.read(repo_root / "setup.cfg")
        patterns = setup["options.package_data"]["database"].split()
        shipped = [PurePosixPath(p.relative_to(DATA_DIR).as_posix()) for p in DATA_DIR.rglob("*.json")]
        assert len(shipped) > 1
        for rel in shipped:
            assert any(len(PurePosixPath(p).parts) == len(rel.parts) and rel.match(p) for p in patterns), rel

    def test_unreadable_fixture(self, tmp_path):
        bad = tmp_path / "fixture.json"
        bad.write_text("{")
        with pytest.raises(ConfigError):
            load_fixture(bad)
        with pytest.raises(ConfigError):
            load_fixture(tmp_path / "missing.json")

    def test_selectors(self, paper_step):
        assert select(paper_step, "db-host") == [DB_HOST]
        assert len(select(paper_step, "db-host:shell1")) == 3
        assert len(select(paper_step, "db-host:shell2")) == 8
        assert len(select(paper_step, "floating-C:OH-H")) == 1
        assert select(paper_step, "index:7") == [7]
        with pytest.raises(ConfigError):
            select(paper_step, "db-host:shell9")
        with pytest.raises(ConfigError):
            select(paper_step, f"index:{len(paper_step)}")

    def test_index_selector_wins(self, paper_step):
        table = resolve_a_iso(paper_step, {"db-host": 329.0, f"index:{DB_HOST}": 1.0})
        assert table[DB_HOST] == 1.0


@pytest.fixture(scope="module")
def step_scan(paper_step):
    fixture = load_fixture()
    center = db_spin_center(paper_step, fixture.lobe_offset)
    table = resolve_a_iso(paper_step, fixture.a_iso)
    return scan_structure(paper_step, center, fixture.field_direction, table, 10.0)


class TestScan:
    def test_rows(self, paper_step, step_scan):
        assert len(step_scan) == sum(a.species in ("C", "H") for a in paper_step.atoms) == 355
        assert [r.atom_index for r in step_scan] == sorted(r.atom_index for r in step_scan)

    def test_host_carbon(self, step_scan):
        host = next(r for r in step_scan if r.atom_index == DB_HOST)
        assert host.isotope == "13C"
        assert (host.a, host.b) == pytest.approx((329.0, 105.0), abs=0.5)

    def test_hydroxyl_proton(self, paper_step, step_scan):
        proton = select(paper_step, "floating-C:OH-H")[0]
        row = next(r for r in step_scan if r.atom_index == proton)
        assert row.a == pytest.approx(4.3, abs=1e-3)
        assert row.b == pytest.approx(2.02, abs=1e-2)

    def test_fixture_shell_couplings_flag_twelve(self, paper_step, step_scan):
        # host plus the two carbon shells that carry a fixture Fermi-contact value
        shells = select(paper_step, "db-host:shell1") + select(paper_step, "db-host:shell2")
        assert (len(select(paper_step, "db-host:shell1")), len(shells)) == (3, 11)
        assert sorted(r.atom_index for r in step_scan if r.flagged) == sorted([DB_HOST] + shells)

    def test_dipolar_coupling_alone_flags_only_the_host(self, paper_step):
        center = db_spin_center(paper_step, load_fixture().lobe_offset)
        rows = scan_structure(paper_step, center, (0, 0, 1), {}, 10.0)
        assert [r.atom_index for r in rows if r.flagged] == [DB_HOST]

    def test_infinite_threshold(self, paper_step):
        center = db_spin_center(paper_step, 0.6446)
        assert not any(r.flagged for r in scan_structure(paper_step, center, (0, 0, 1), threshold=math.inf))

    def test_back_lobe_splits_the_population(self, paper_step):
        center = db_spin_center(paper_step, 0.6446, back_lobe=0.25)
        assert [p for _, p in center.sites] == [0.75, 0.25]

    def test_needs_one_open_db(self):
        with pytest.raises(InputError):
            db_spin_center(build_preset("flat"), 0.6446)

    def test_lobe_offset_must_be_positive(self, paper_step):
        with pytest.raises(InputError):
            db_spin_center(paper_step, 0.0)
