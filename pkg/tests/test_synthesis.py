import numpy as np
import pytest

from reachavoid.cli import gen_vehicle, problem_from_dict
from reachavoid.geometry import Ball, CoverTooLarge, PolytopicSet
from reachavoid.lra import Unbounded, atom_count
from reachavoid.model import AdversarySequence, ControlSequence, LTVSystem, simulate
from reachavoid.synthesis import (
    ArasProblem,
    BudgetCapExceeded,
    GeneralizedProblem,
    build_synthesis_formula,
    cover_polytope,
    max_feasible_budget,
    synthesize,
    synthesize_attack,
    synthesize_attack_table,
    synthesize_generalized,
    table_synthesize,
    validate_attack,
    validate_control,
)


def scalar_problem():
    """x+ = x + u + a, |x| <= 2 along the way, |x_4| <= 1, |u| <= 1."""
    sys = LTVSystem.time_invariant(np.array([[1.0]]), np.array([[1.0]]), np.array([[1.0]]), 4)
    safe = PolytopicSet.box(np.array([-2.0]), np.array([2.0]))
    goal = PolytopicSet.box(np.array([-1.0]), np.array([1.0]))
    ctr = PolytopicSet.box(np.full(4, -1.0), np.full(4, 1.0))
    return ArasProblem(sys, np.zeros(1), 0.0, 1.0, safe, goal, ctr)


def planar_problem(goal_half, T=6):
    sys = LTVSystem.time_invariant(np.eye(2), 0.05 * np.eye(2), 0.02 * np.eye(2), T)
    safe = PolytopicSet.box(np.full(2, -2.0), np.full(2, 2.0))
    goal = PolytopicSet.box(np.full(2, -goal_half), np.full(2, goal_half))
    ctr = PolytopicSet.box(np.full(2 * T, -1.0), np.full(2 * T, 1.0))
    return ArasProblem(sys, np.array([1.0, 0.0]), 0.5, 1.0, safe, goal, ctr)


def adversary_in_budget(rng, sys, budget, scale=1.0):
    g = rng.standard_normal(sys.l * sys.T)
    g *= scale * np.sqrt(budget) * rng.uniform() ** 0.5 / np.linalg.norm(g)
    return AdversarySequence.from_stacked(g, sys.l)


def test_analytic_budget_threshold():
    prob = scalar_problem()
    b = max_feasible_budget(prob, tol=1e-5)
    assert b == pytest.approx(0.25, abs=1e-5)
    assert synthesize(prob.with_budget(0.25)).is_sat
    assert not synthesize(prob.with_budget(0.26)).is_sat


def test_max_feasible_budget_brackets_the_threshold():
    prob = planar_problem(1.35)
    b = max_feasible_budget(prob, tol=1e-3)
    assert b > 0
    assert synthesize(prob.with_budget(b)).is_sat
    assert not synthesize(prob.with_budget(b + 1e-3)).is_sat


def test_budget_zero_when_already_infeasible():
    prob = planar_problem(1.35)
    far = PolytopicSet.box(np.array([4.0, -0.5]), np.array([5.0, 0.5]))
    hopeless = ArasProblem(
        prob.sys, prob.theta, prob.delta, prob.budget, prob.safe, far, prob.ctr
    )
    assert max_feasible_budget(hopeless) == 0.0


def test_budget_cap_exceeded_without_adversary_leverage():
    sys = LTVSystem.time_invariant(np.array([[1.0]]), np.array([[1.0]]), np.array([[0.0]]), 3)
    safe = PolytopicSet.box(np.array([-2.0]), np.array([2.0]))
    ctr = PolytopicSet.box(np.full(3, -1.0), np.full(3, 1.0))
    prob = ArasProblem(sys, np.zeros(1), 0.0, 1.0, safe, safe, ctr)
    with pytest.raises(BudgetCapExceeded):
        max_feasible_budget(prob, cap=8.0)


def test_unsafe_start_fails_before_solving():
    prob = planar_problem(1.35)
    bad = ArasProblem(
        prob.sys, np.array([3.0, 0.0]), prob.delta, prob.budget, prob.safe, prob.goal, prob.ctr
    )
    out = synthesize(bad)
    assert out.status == "failed"
    assert out.control is None
    assert "step 0" in out.reason
    assert out.formula_size > 0


def test_formula_size_identity():
    for prob in (planar_problem(1.35), problem_from_dict(gen_vehicle(T=12, n_obstacles=2))):
        formula, ok0 = build_synthesis_formula(prob)
        expected = (
            prob.sys.T * prob.safe.atom_count + prob.goal.atom_count + prob.ctr.atom_count
        )
        assert atom_count(formula) == expected
        assert ok0
        out = synthesize(prob)
        assert out.formula_size == expected


def test_synthesis_is_deterministic():
    prob = planar_problem(1.35)
    a = synthesize(prob)
    b = synthesize(prob)
    assert a.status == b.status == "sat"
    assert np.array_equal(a.control.stacked(), b.control.stacked())


def test_vehicle_instance_end_to_end():
    prob = problem_from_dict(gen_vehicle(T=12, n_obstacles=2, seed=1))
    out = synthesize(prob)
    assert out.is_sat
    report = validate_control(prob, out.control, n_samples=100, seed=4)
    assert report.ok
    assert report.worst_slack >= -1e-6


def test_validation_catches_corrupted_control():
    prob = planar_problem(1.35)
    out = synthesize(prob)
    assert out.is_sat
    stacked = out.control.stacked().copy()
    stacked[0] += 10.0  # leaves the control box and wrecks the trajectory
    bad = ControlSequence.from_stacked(stacked, prob.sys.m)
    report = validate_control(prob, bad, n_samples=50, seed=4)
    assert not report.ok
    assert report.worst_slack < 0


def test_unreachable_goal_fails():
    prob = planar_problem(1.35)
    far = PolytopicSet.box(np.array([4.0, -0.5]), np.array([5.0, 0.5]))
    out = synthesize(
        ArasProblem(prob.sys, prob.theta, prob.delta, prob.budget, prob.safe, far, prob.ctr)
    )
    assert out.status == "failed"
    assert out.control is None


def test_problem_validation_and_updates():
    prob = planar_problem(1.35)
    with pytest.raises(ValueError):
        ArasProblem(prob.sys, np.zeros(3), 0.1, 1.0, prob.safe, prob.goal, prob.ctr)
    with pytest.raises(ValueError):
        ArasProblem(prob.sys, prob.theta, -0.1, 1.0, prob.safe, prob.goal, prob.ctr)
    with pytest.raises(ValueError):
        ArasProblem(prob.sys, prob.theta, 0.1, -1.0, prob.safe, prob.goal, prob.ctr)
    moved = prob.with_init(np.array([0.5, 0.5]), 0.1)
    assert moved.delta == 0.1 and prob.delta == 0.5
    assert prob.with_budget(2.0).budget == 2.0


def test_table_failure_produces_uncontrollable_witness():
    prob = planar_problem(1.2)
    result = table_synthesize(prob)
    assert result.status == "failed"
    assert result.table is None
    assert np.linalg.norm(result.witness - prob.theta) <= prob.delta + 1e-9
    assert synthesize(prob.with_init(result.witness, 0.0)).status == "failed"


def test_table_success_covers_the_initial_ball():
    prob = planar_problem(1.35)
    result = table_synthesize(prob)
    assert result.status == "success"
    assert result.unresolved == []
    assert result.cells_processed >= len(result.table)
    rng = np.random.default_rng(8)
    for _ in range(200):
        v = rng.standard_normal(2)
        x0 = prob.theta + prob.delta * rng.uniform() ** 0.5 * v / np.linalg.norm(v)
        entry = result.table.control_for(x0)
        assert entry is not None
        assert entry.cell.contains(x0, tol=1e-9)
    # spot-check the guarantee: entry controls win from anywhere in their cell
    for _ in range(50):
        v = rng.standard_normal(2)
        x0 = prob.theta + prob.delta * rng.uniform() ** 0.5 * v / np.linalg.norm(v)
        entry = result.table.control_for(x0)
        adv = adversary_in_budget(rng, prob.sys, prob.budget)
        traj = simulate(prob.sys, x0, entry.control, adv)
        assert all(prob.safe.contains(traj.states[t], tol=1e-7) for t in range(prob.sys.T + 1))
        assert prob.goal.contains(traj.states[prob.sys.T], tol=1e-7)


def test_table_threads_do_not_change_the_result():
    prob = planar_problem(1.35)
    one = table_synthesize(prob)
    two = table_synthesize(prob, threads=4)
    assert one.status == two.status == "success"
    assert len(one.table) == len(two.table)
    for a, b in zip(one.table.entries, two.table.entries):
        assert np.array_equal(a.cell.center, b.cell.center)
        assert a.cell.radius == b.cell.radius
        assert np.array_equal(a.control.stacked(), b.control.stacked())


def test_table_resolution_floor_leaves_inconclusive():
    prob = planar_problem(1.35)
    result = table_synthesize(prob, eps_min=0.5)
    assert result.status == "inconclusive"
    assert len(result.unresolved) > 0
    assert all(cell.radius < 1.0 for cell in result.unresolved)


def test_table_point_initial_set():
    prob = planar_problem(1.35).with_init(np.array([1.0, 0.0]), 0.0)
    result = table_synthesize(prob)
    assert result.status == "success"
    assert len(result.table) == 1
    assert result.table.entries[0].cell.radius == 0.0


def generalized_instance(goal):
    T = 3
    sys = LTVSystem.time_invariant(np.eye(2), 0.1 * np.eye(2), np.array([[0.02], [0.01]]), T)
    safe = PolytopicSet.box(np.full(2, -2.0), np.full(2, 2.0))
    init = Ball(np.array([0.2, 0.1]), 0.1)
    adv = PolytopicSet.box(np.full(T, -0.05), np.full(T, 0.05))
    ctr = Ball(np.zeros(2 * T), 2.0)
    return GeneralizedProblem(sys, init, adv, ctr, safe, goal, eps=0.15)


def test_generalized_sat_control_is_sound():
    goal = PolytopicSet.from_rows(
        np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]),
        np.array([0.9, -0.05, 0.6, 0.6]),
    )
    gp = generalized_instance(goal)
    out = synthesize_generalized(gp)
    assert out.is_sat
    assert out.formula_size > 0
    rng = np.random.default_rng(3)
    for _ in range(300):
        v = rng.standard_normal(2)
        x0 = gp.init.center + gp.init.radius * rng.uniform() ** 0.5 * v / np.linalg.norm(v)
        a = AdversarySequence.from_stacked(rng.uniform(-0.05, 0.05, size=gp.sys.T), 1)
        traj = simulate(gp.sys, x0, out.control, a)
        assert all(gp.safe.contains(traj.states[t], tol=1e-7) for t in range(gp.sys.T + 1))
        assert gp.goal.contains(traj.states[gp.sys.T], tol=1e-7)


def test_generalized_tight_goal_is_inconclusive():
    goal = PolytopicSet.box(np.full(2, -0.02), np.full(2, 0.02))
    out = synthesize_generalized(generalized_instance(goal))
    assert out.status == "inconclusive"
    assert out.control is None


def test_generalized_input_validation():
    goal = PolytopicSet.box(np.full(2, -0.9), np.full(2, 0.9))
    gp = generalized_instance(goal)
    with pytest.raises(TypeError):
        GeneralizedProblem(gp.sys, "ball", gp.adv, gp.ctr, gp.safe, gp.goal, eps=0.1)
    with pytest.raises(ValueError):
        GeneralizedProblem(gp.sys, Ball(np.zeros(3), 1.0), gp.adv, gp.ctr, gp.safe, gp.goal, 0.1)
    with pytest.raises(ValueError):
        GeneralizedProblem(gp.sys, gp.init, gp.adv, gp.ctr, gp.safe, gp.goal, eps=0.0)


def test_cover_polytope_covers_and_rejects():
    tri = PolytopicSet.from_rows(
        np.array([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]]), np.array([0.0, 0.0, 1.0])
    )
    cover = cover_polytope(tri, 0.2)
    centers = np.array([c.center for c in cover])
    assert all(tri.contains(c) for c in centers)
    rng = np.random.default_rng(5)
    pts = rng.uniform(0, 1, size=(500, 2))
    pts = pts[pts.sum(axis=1) <= 1.0]
    dists = np.linalg.norm(pts[:, None, :] - centers[None, :, :], axis=2).min(axis=1)
    assert dists.max() <= 0.2 + 1e-9

    empty = PolytopicSet.from_rows(np.array([[1.0], [-1.0]]), np.array([-1.0, -1.0]))
    assert cover_polytope(empty, 0.5) == []
    with pytest.raises(Unbounded):
        cover_polytope(PolytopicSet.from_rows(np.array([[1.0]]), np.array([0.0])), 0.5)
    disjunctive = PolytopicSet(
        1, ((tri.clauses[0][0].substitute(np.array([[1.0, 0.0]]).T, np.zeros(2)),) * 2,)
    )
    with pytest.raises(ValueError):
        cover_polytope(disjunctive, 0.5)
    with pytest.raises(ValueError):
        cover_polytope(tri, 0.0)
    with pytest.raises(CoverTooLarge):
        cover_polytope(tri, 1e-4, cap=10)


def attack_instance():
    sys = LTVSystem.time_invariant(np.array([[1.0]]), np.array([[0.1]]), np.array([[1.0]]), 4)
    unsafe = PolytopicSet.from_rows(np.array([[-1.0]]), np.array([-2.0]))
    adv = PolytopicSet.box(np.full(4, -1.0), np.full(4, 1.0))
    return sys, unsafe, adv


def test_attack_is_certified_and_validates():
    sys, unsafe, adv = attack_instance()
    out = synthesize_attack(sys, np.array([0.0]), unsafe, adv, ctr_budget=0.01)
    assert out.is_sat
    assert out.certified_step == 3
    assert adv.contains(out.adversary.stacked(), tol=1e-9)
    report = validate_attack(
        sys, np.array([0.0]), out.adversary, unsafe, 0.01, out.certified_step
    )
    assert report.ok
    assert report.worst_slack > 0


def test_attack_fails_against_strong_controller():
    sys, unsafe, adv = attack_instance()
    out = synthesize_attack(sys, np.array([0.0]), unsafe, adv, ctr_budget=1e6)
    assert out.status == "failed"
    assert out.adversary is None and out.certified_step is None


def test_attack_input_validation():
    sys, unsafe, adv = attack_instance()
    with pytest.raises(ValueError):
        synthesize_attack(sys, np.zeros(1), PolytopicSet.box(np.zeros(2), np.ones(2)), adv, 0.1)
    with pytest.raises(ValueError):
        synthesize_attack(sys, np.zeros(1), unsafe, PolytopicSet.box(np.zeros(3), np.ones(3)), 0.1)
    with pytest.raises(ValueError):
        synthesize_attack(sys, np.zeros(1), unsafe, adv, -0.5)


def test_attack_table_entries_hold_over_their_cells():
    sys, unsafe, adv = attack_instance()
    table = synthesize_attack_table(
        sys, np.array([-0.5]), np.array([0.5]), 0.25, unsafe, adv, ctr_budget=0.01
    )
    assert len(table) == table.cells_examined == 2
    rng = np.random.default_rng(2)
    for entry in table.entries:
        for _ in range(3):
            x0 = entry.cell.center + entry.cell.radius * rng.uniform(-1, 1, size=1)
            report = validate_attack(
                sys, x0, entry.adversary, unsafe, 0.01, entry.certified_step, n_samples=200
            )
            assert report.ok
    assert table.attack_for(np.array([5.0])) is None
