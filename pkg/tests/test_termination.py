from collections import Counter

import pytest

from crystal.termination import EDGE_VARIANTS, edge_rules, find_sites, pair_dimers, terminate
from crystal.topology import closest_approach, coordination, enumerate_dbs, neighbor_list
from errors import IncompleteTerminationError, InputError, TerminationError

from conftest import DB_HOST, RAISED_SITE


def _oxygens(s):
    return Counter(a.role for a in s.atoms if a.species == "O")


@pytest.fixture(scope="module")
def variants(raised):
    return {name: terminate(raised, edge_rules(name)) for name in EDGE_VARIANTS}


class TestRules:
    def test_unknown_variant(self):
        with pytest.raises(InputError):
            edge_rules("O/O/O")

    def test_variant_rules(self):
        assert edge_rules("O/H/H")["step-bridge"] == "O-bridge"
        assert edge_rules("O/H/H")["trench"] == "H"
        assert edge_rules("O/OH/OH")["trench"] == "OH"
        assert edge_rules("OH/OH")["step-bridge"] == "H"
        assert edge_rules("OH/OH")["trench"] == "OH"
        assert edge_rules()["db-host"] == "none"
        assert edge_rules()["floating"] == "OH"

    def test_missing_rule(self, flat_slab):
        with pytest.raises(IncompleteTerminationError):
            terminate(flat_slab, {"terrace": "H"})

    def test_empty_rule_list(self, small_slab):
        with pytest.raises(IncompleteTerminationError):
            terminate(small_slab, {"*": []})

    def test_unknown_terminator(self, small_slab):
        with pytest.raises(InputError):
            terminate(small_slab, {"*": "F"})


class TestFlat:
    def test_hydrogen_everywhere(self, flat_slab):
        s = terminate(flat_slab, {"*": "H"})
        assert enumerate_dbs(s).total == 0
        assert {a.role for a in s.atoms[len(flat_slab):]} == {"terminator-H"}
        assert s.atoms[:len(flat_slab)] == flat_slab.atoms

    def test_dimers_pair_every_surface_atom(self, flat_slab):
        paired = pair_dimers(flat_slab)
        assert len(paired.dimers) == 36
        assert all(n == 3 for n in coordination(paired)[-36:])

    def test_oxygen_bridges(self, flat_slab):
        s = terminate(flat_slab, {"*": "O-bridge"})
        assert enumerate_dbs(s).total == 0
        assert closest_approach(s)[2] > 0.7


class TestSiteClasses:
    def test_classes_of_the_raised_step(self, raised):
        classes = Counter(site.site_class for site in find_sites(pair_dimers(raised)))
        assert classes["db-host"] == 1
        assert classes["floating"] == 1
        assert classes["trench"] == 2
        assert classes["step-bridge"] == 11
        assert classes["terrace"] == 8
        assert classes["bottom"] == 18

    def test_host_site_is_the_buried_carbon(self, raised):
        hosts = [site for site in find_sites(pair_dimers(raised)) if site.site_class == "db-host"]
        assert hosts[0].atoms == (DB_HOST,)


class TestEdgeVariants:
    @pytest.mark.parametrize("variant", sorted(EDGE_VARIANTS))
    def test_one_db_left(self, variants, variant):
        report = enumerate_dbs(variants[variant])
        assert report.total == 1
        assert report.count(DB_HOST) == 1

    @pytest.mark.parametrize("variant", sorted(EDGE_VARIANTS))
    def test_no_overlap_or_overcoordination(self, variants, variant):
        variants[variant].validate()

    def test_floating_carbon_is_hydroxylated(self, variants):
        s = variants["O/H/H"]
        bonds = neighbor_list(s)[RAISED_SITE]
        oxygens = [b for b in bonds if s.atoms[b.j].species == "O"]
        assert len(oxygens) == 1
        assert s.atoms[oxygens[0].j].role == "terminator-OH"
        assert oxygens[0].distance == pytest.approx(1.43, abs=1e-6)

    def test_oxygen_inventory(self, variants):
        # terrace cycles H, O-bridge, OH over 8 pair sites: 3 bridges and 2 hydroxyl pairs
        assert _oxygens(variants["O/H/H"]) == {"terminator-O-bridge": 14, "terminator-OH": 5}
        assert _oxygens(variants["O/OH/OH"]) == {"terminator-O-bridge": 14, "terminator-OH": 7}
        assert _oxygens(variants["OH/OH"]) == {"terminator-O-bridge": 3, "terminator-OH": 7}

    def test_bridge_on_a_lone_db_is_rejected(self, raised):
        rules = edge_rules("O/H/H")
        rules["trench"] = "O-bridge"
        with pytest.raises(TerminationError):
            terminate(raised, rules)

