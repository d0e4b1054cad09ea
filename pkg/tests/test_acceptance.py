"""Acceptance gate: one test per criterion, each printing a PASS line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see one line per
criterion. The desk-scale sweep criteria share a module-scoped sweep
(about 3-6 minutes on two cores); everything else is seconds.
"""

import time

import numpy as np
import pytest

from sharedq import (
    AnnealSchedule,
    ConfigError,
    LossConfig,
    NetParams,
    OptimConfig,
    PayoffParams,
    ReplayBuffer,
    RunConfig,
    Simulation,
    TDConfig,
    TopologySpec,
    Transition,
    collapse_threshold,
    double_dqn_target_1step,
    forward,
    init_optimizer,
    init_params,
    kmeans2,
    loss_and_grad,
    make_grid,
    make_modular,
    make_random_regular,
    make_small_world,
    nstep_target,
    optimizer_step,
    payoff,
    run,
    silhouette,
    sweep,
)
from sharedq.analysis import ABOVE_RANGE, BELOW_RANGE
from sharedq.config import parse_spec_text
from sharedq.learner import train_step
from sharedq.net import params_hash

from oracles import (
    adam_reference,
    adamw_reference,
    brute_best_two_partition_sse,
    brute_silhouette,
    finite_difference_grads,
    reference_loss,
    rmsprop_reference,
    target_1step_from_table,
    target_nstep_from_table,
)


def ok(message):
    print(f"PASS: {message}")


@pytest.fixture(scope="module")
def desk_scale_sweep():
    """15x15 grid, d_r = d_g = 0.25, 30k train + 3k eval, 3 seeds,
    three anneal schedules spanning low/mid/high exploration strength."""
    base = RunConfig(
        topology=TopologySpec(kind="grid", L=15),
        payoff=PayoffParams(0.25, 0.25),
        schedule=AnnealSchedule(0.6, 0.10, 30_000),
        t_train=30_000,
        t_eval=3_000,
        seed=0,
    )
    started = time.perf_counter()
    rows = sweep(base, {"tau_init": [0.2, 0.6, 1.2]}, seeds=[0, 1, 2], workers=2)
    elapsed = time.perf_counter() - started
    assert all(r.error is None for r in rows), [r.error for r in rows]
    by_tau = {}
    for tau in (0.2, 0.6, 1.2):
        sel = [r.result for r in rows
               if r.entry.axis_values["tau_init"] == tau]
        by_tau[tau] = sel
    return by_tau, elapsed


def test_acceptance_gradient_correctness():
    # analytic vs central finite differences: rel err < 1e-4,
    # 100 random small nets (input 5, hidden 8, batch 16), huber and mse
    started = time.perf_counter()
    rng = np.random.default_rng(2024)
    checked = 0
    for kind in ("huber", "mse"):
        cfg = LossConfig(kind, 1.0)
        for _ in range(50):
            p = NetParams(
                w1=rng.standard_normal((8, 5)) * 0.8,
                b1=rng.standard_normal(8) * 0.5,
                w2=rng.standard_normal((2, 8)) * 0.8,
                b2=rng.standard_normal(2) * 0.5,
            )
            xs = rng.standard_normal((16, 5))
            actions = rng.integers(0, 2, 16)
            targets = rng.standard_normal(16)
            _, grads = loss_and_grad(p, xs, actions, targets, cfg)
            fd = finite_difference_grads(
                lambda arrays: reference_loss(
                    arrays, xs, actions, targets, kind
                ),
                [a.copy() for a in p.arrays()],
            )
            for got, want in zip(grads.arrays(), fd):
                scale = max(1.0, float(np.max(np.abs(want))))
                assert np.max(np.abs(got - want)) / scale < 1e-4
            checked += 1
    elapsed = time.perf_counter() - started
    assert checked == 100
    assert elapsed < 10.0
    ok(f"gradient correctness: 100 nets x 2 losses vs finite differences "
       f"in {elapsed:.1f}s")


def scalar_params(value):
    return NetParams(
        np.full((1, 1), value), np.full(1, value),
        np.full((2, 1), value), np.full(2, value),
    )


def vector3_params(values):
    w1 = np.array([[values[0]]])
    b1 = np.array([values[1]])
    w2 = np.array([[values[2]], [values[2]]])
    return NetParams(w1, b1, w2, np.array([values[2], values[2]]))


def test_acceptance_optimizer_oracle():
    # single-step and 10-step updates vs hand-derived update rules, 1e-10
    references = {
        "adamw": adamw_reference,
        "adam": adam_reference,
        "rmsprop": rmsprop_reference,
    }
    rng = np.random.default_rng(7)
    for kind, reference in references.items():
        cfg = OptimConfig(kind)
        # scalar problem, 1 then 10 steps
        for n_steps in (1, 10):
            grads = [float(g) for g in rng.standard_normal(n_steps)]
            p = scalar_params(0.8)
            st = init_optimizer(cfg, p)
            for g in grads:
                p, st = optimizer_step(p, st, scalar_params(g))
            want = reference(0.8, grads, wd=cfg.weight_decay)
            assert abs(p.w1[0, 0] - want) < 1e-10
            assert abs(p.b2[1] - want) < 1e-10
        # 3-parameter problem: distinct values evolve independently
        values = [0.3, -1.2, 2.0]
        grad_seq = [
            [float(g) for g in rng.standard_normal(10)] for _ in range(3)
        ]
        p = vector3_params(values)
        st = init_optimizer(cfg, p)
        for step in range(10):
            p, st = optimizer_step(
                p, st,
                vector3_params([grad_seq[i][step] for i in range(3)]),
            )
        got = [p.w1[0, 0], p.b1[0], p.w2[0, 0]]
        for i in range(3):
            want = reference(values[i], grad_seq[i], wd=cfg.weight_decay)
            assert abs(got[i] - want) < 1e-10
    ok("optimizer oracle: adamw/adam/rmsprop match hand-derived updates "
       "to 1e-10 (1 and 10 steps, scalar and 3-parameter)")


def test_acceptance_target_equations():
    # direct-formula oracle over explicit Q tables, bitwise, 1000 cases
    rng = np.random.default_rng(99)
    buf = ReplayBuffer(2_048)
    for t in range(1, 400):
        for agent in range(3):
            if rng.random() < 0.85:  # gaps force 1-step fallbacks too
                buf.push(Transition(
                    agent=agent, t=t,
                    s=rng.standard_normal(5),
                    a=int(rng.integers(2)),
                    r=float(rng.standard_normal()),
                    s_next=rng.standard_normal(5),
                ))
    online = init_params(5, 8, seed=5)
    target = init_params(5, 8, seed=6)
    cases = 0
    n_chains = 0
    for c in buf.live_counters():
        if cases >= 1000:
            break
        gamma = float(rng.choice([0.9, 0.97, 0.99]))
        tr = buf.get(int(c))
        q_on = forward(online, tr.s_next)[0]
        q_tg = forward(target, tr.s_next)[0]
        want = target_1step_from_table(tr.r, q_on.tolist(), q_tg.tolist(), gamma)
        assert double_dqn_target_1step(tr, online, target, gamma) == want

        got_n = nstep_target(buf, int(c), 5, online, target, gamma)
        chain = buf.chain(int(c), 5)
        if chain is not None:
            rewards = [buf.get(int(cc)).r for cc in chain]
            boot = buf.get(int(chain[-1])).s_next
            want_n = target_nstep_from_table(
                rewards,
                forward(online, boot)[0].tolist(),
                forward(target, boot)[0].tolist(),
                gamma,
            )
            assert got_n == want_n
            n_chains += 1
        else:
            assert got_n is None
        # n = 1 must reproduce the 1-step target bit for bit
        assert nstep_target(buf, int(c), 1, online, target, gamma) == want
        cases += 1
    assert cases == 1000 and n_chains > 100
    ok(f"target equations: 1000 randomized cases match the direct-formula "
       f"oracle bitwise ({n_chains} full 5-step chains)")


def test_acceptance_paper_constants_default_config():
    spec = parse_spec_text("")  # empty spec = default experiment
    base = spec.base
    p = base.payoff
    assert payoff(0, 0, p) == 1.0
    assert payoff(1, 1, p) == 0.0
    assert payoff(0, 1, p) == -0.25
    assert payoff(1, 0, p) == 1.25
    assert payoff(1, 0, PayoffParams(d_r=0.4, d_g=0.0)) == 1.0
    assert base.buffer_capacity == 90_000
    assert base.td.batch_size == 256
    assert base.td.gamma == 0.99
    assert base.td.target_sync_interval == 2_000
    assert base.td.grad_clip == 0.5
    assert base.eval_policy.tau_eval == 0.10
    assert base.t_train == 95_000
    assert base.t_eval == 5_000
    assert base.td.n_step == 5
    assert base.hidden_dim == 96
    assert base.topology.population == 900
    ok("default config honors the published constants "
       "(payoffs, buffer 90k, batch 256, gamma .99, sync 2k, clip .5, "
       "tau_eval .10, 95k+5k steps)")


def test_acceptance_topology_invariants():
    started = time.perf_counter()
    topos = [
        make_grid(30),
        make_random_regular(900, seed=0),
        make_small_world(900, p_rewire=0.1, seed=0),
        make_modular(900, n_modules=9, n_cross=20, seed=0),
    ]
    for topo in topos:
        assert topo.n_agents == 900
        nb = topo.neighbors
        ids = np.arange(900)
        assert nb.shape == (900, 4)
        assert not np.any(nb == ids[:, None])  # no self-loops
        assert np.all(np.diff(np.sort(nb, axis=1), axis=1) > 0)  # distinct
        pairs = set(zip(np.repeat(ids, 4).tolist(), nb.ravel().tolist()))
        assert all((j, i) in pairs for i, j in pairs)  # symmetric
    grid = topos[0]
    # periodicity spot checks on the 30x30 grid
    assert 870 in grid.neighbors[0]  # up from row 0 wraps to row 29
    assert 29 in grid.neighbors[0]  # left from col 0 wraps to col 29
    assert 0 in grid.neighbors[870] and 0 in grid.neighbors[29]
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0
    ok(f"topology invariants: degree-4/symmetry/no-self-loop for all four "
       f"generators at n=900 in {elapsed:.1f}s")


def test_acceptance_determinism_two_full_runs():
    started = time.perf_counter()
    cfg = RunConfig(
        topology=TopologySpec(kind="grid", L=10),
        schedule=AnnealSchedule(0.6, 0.10, 5_000),
        t_train=5_000,
        t_eval=500,
        seed=31,
    )
    a = run(cfg)
    b = run(cfg)
    assert np.array_equal(a.coop_trace, b.coop_trace)
    assert a.param_hash == b.param_hash
    elapsed = time.perf_counter() - started
    assert elapsed < 120.0
    ok(f"determinism: two 10x10 runs (5000+500 steps) bit-identical "
       f"in {elapsed:.1f}s")


def test_acceptance_evaluation_freeze():
    cfg = RunConfig(
        topology=TopologySpec(kind="grid", L=8),
        schedule=AnnealSchedule(0.5, 0.10, 800),
        t_train=800,
        t_eval=200,
        architecture="grouped",
        n_groups=4,
        td=TDConfig(batch_size=64, target_sync_interval=300),
        buffer_capacity=10_000,
        seed=3,
    )
    sim = Simulation(cfg)
    sim.run_training()
    hash_before = sim.param_hash()
    steps_before = [g.optimizer.step_count for g in sim.groups]
    sizes_before = [len(g.buffer) for g in sim.groups]
    sim.run_eval()
    assert sim.param_hash() == hash_before
    assert [g.optimizer.step_count for g in sim.groups] == steps_before
    assert [len(g.buffer) for g in sim.groups] == sizes_before
    ok("evaluation freeze: parameter hash, optimizer step counts, and "
       "buffer sizes unchanged across the evaluation phase")


def test_acceptance_desk_scale_collapse_trend(desk_scale_sweep):
    by_tau, elapsed = desk_scale_sweep
    means = {
        tau: float(np.mean([r.coop_mean for r in results]))
        for tau, results in by_tau.items()
    }
    low, high = means[0.2], means[1.2]
    assert low > high
    assert low - high >= 0.1
    assert elapsed < 1800.0
    ok(f"collapse trend: mean cooperation {low:.3f} (low B) vs {high:.3f} "
       f"(high B), gap {low - high:.3f} >= 0.1, sweep took {elapsed:.0f}s")


def test_acceptance_q_gap_contraction(desk_scale_sweep):
    by_tau, _ = desk_scale_sweep
    gap = {
        tau: float(np.mean([r.q_gap for r in results]))
        for tau, results in by_tau.items()
    }
    q_means = [r.q_mean for results in by_tau.values() for r in results]
    assert gap[1.2] < gap[0.2]
    assert all(np.isfinite(q) and q < 1e3 for q in q_means)
    ok(f"q-gap contraction: {gap[0.2]:.3f} (low B) -> {gap[1.2]:.3f} "
       f"(high B); q_mean finite and < 1e3 at all B")


def test_acceptance_silhouette_and_kmeans_oracles():
    rng = np.random.default_rng(654)
    for _ in range(50):
        n = int(rng.integers(4, 201))
        pts = rng.standard_normal((n, int(rng.integers(1, 8))))
        labels = rng.integers(0, 2, n)
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        assert abs(
            silhouette(pts, labels) - brute_silhouette(pts, labels)
        ) < 1e-12
    hits = 0
    for trial in range(100):
        pts = rng.standard_normal((int(rng.integers(4, 13)), 2))
        best = brute_best_two_partition_sse(pts)
        got = kmeans2(pts, seed=trial).sse
        assert got >= best - 1e-9
        if got <= best + 1e-9:
            hits += 1
    assert hits >= 95
    ok(f"silhouette matches the O(n^2) definition to 1e-12 on 50 sets; "
       f"k-means hit the exhaustive 2-partition optimum {hits}/100 times")


def test_acceptance_threshold_extraction():
    grid = [0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40]
    res = collapse_threshold(
        grid, [0.9, 0.8, 0.7, 0.5, 0.4, 0.3, 0.2], criterion=0.55
    )
    assert res.d_r_star == pytest.approx(0.20)
    assert collapse_threshold(grid, [0.9] * 7, 0.55).status == ABOVE_RANGE
    assert collapse_threshold(grid, [0.1] * 7, 0.55).status == BELOW_RANGE
    ok("threshold extraction: synthetic grid yields d_r* = 0.20 at "
       "criterion 0.55; all-above/all-below yield range markers")


def test_acceptance_grouped_mode_isolation():
    cfg = RunConfig(
        topology=TopologySpec(kind="grid", L=6),
        schedule=AnnealSchedule(0.5, 0.10, 200),
        t_train=200,
        t_eval=50,
        architecture="grouped",
        n_groups=6,
        td=TDConfig(batch_size=32),
        buffer_capacity=4_000,
        hidden_dim=16,
        activation_sample=0,
        seed=12,
    )
    sim = Simulation(cfg)
    sim.run_training()
    before = [params_hash(g.online) for g in sim.groups]
    train_step(sim.groups[3], cfg.td, cfg.loss, np.random.default_rng(0))
    after = [params_hash(g.online) for g in sim.groups]
    assert [i for i in range(6) if before[i] != after[i]] == [3]

    shared = run(RunConfig(
        topology=TopologySpec(kind="grid", L=5),
        schedule=AnnealSchedule(0.5, 0.10, 150),
        t_train=150, t_eval=30,
        td=TDConfig(batch_size=32), buffer_capacity=2_000,
        hidden_dim=12, activation_sample=0,
        architecture="shared", seed=9,
    ))
    grouped1 = run(RunConfig(
        topology=TopologySpec(kind="grid", L=5),
        schedule=AnnealSchedule(0.5, 0.10, 150),
        t_train=150, t_eval=30,
        td=TDConfig(batch_size=32), buffer_capacity=2_000,
        hidden_dim=12, activation_sample=0,
        architecture="grouped", n_groups=1, seed=9,
    ))
    assert np.array_equal(shared.coop_trace, grouped1.coop_trace)
    assert shared.param_hash == grouped1.param_hash
    ok("grouped-mode isolation: one train step touches exactly one group; "
       "shared trace equals grouped(1 group) trace")
