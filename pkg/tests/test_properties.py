"""Randomized law checking: a thousand seeded cases per algebraic law, plus
the abelian specialization of the full curved-model pipeline."""

import properties as pr

CASES = 1000


def test_graded_ring_laws():
    pr.suite_graded_ring(CASES)


def test_differential_laws():
    pr.suite_differential(CASES)


def test_cartan_coherence():
    pr.suite_cartan(CASES)


def test_lie_bracket_jacobi():
    pr.suite_lie_jacobi(CASES)


def test_variational_invariance():
    pr.suite_el_invariance(CASES)


def test_maxwell_specializations(maxwell_model):
    pr.maxwell_specializations(maxwell_model)
