"""One test per acceptance criterion; each prints a PASS/FAIL line."""
import pytest

from flatcount import acceptance


@pytest.fixture
def report(capsys):
    def emit(result):
        with capsys.disabled():
            print("\n" + result.line())
        return result
    return emit


def test_criterion_1_volumes(report):
    assert report(acceptance.criterion_1()).passed


def test_criterion_2_closed_and_ratio_forms(report):
    assert report(acceptance.criterion_2()).passed


def test_criterion_3_area_identity(report):
    assert report(acceptance.criterion_3()).passed


def test_criterion_4_billiard_table(report):
    assert report(acceptance.criterion_4()).passed


def test_criterion_5_identity_lab(report):
    assert report(acceptance.criterion_5(seed=0)).passed


def test_criterion_6_rectangles_against_lattice_oracle(report):
    assert report(acceptance.criterion_6(seed=0)).passed


def test_criterion_7_l_shape_asymptotics(report):
    assert report(acceptance.criterion_7()).passed


def test_criterion_8_pillowcase_oracles(report):
    assert report(acceptance.criterion_8()).passed


def test_criterion_9_property_suite_reproducible(report):
    assert report(acceptance.criterion_9(seed=0)).passed
