import numpy as np
import pytest

from sharedq import (
    forward_batch,
    ConfigError,
    LossConfig,
    NetParams,
    OptimConfig,
    PolicyGroup,
    ReplayBuffer,
    TDConfig,
    Transition,
    assign_groups,
    copy_params,
    double_dqn_target_1step,
    forward,
    init_optimizer,
    init_params,
    maybe_sync_target,
    nstep_target,
    params_hash,
    train_step,
)
from sharedq.learner import nstep_targets_batch

from oracles import target_1step_from_table, target_nstep_from_table


def tr(agent, t, r=0.5, a=0, dim=5, fill=0.0):
    s = np.full(dim, fill)
    return Transition(agent=agent, t=t, s=s, a=a, r=r, s_next=s + 1.0)


def seq_buffer(capacity=50, agent=7, n=5, dim=5):
    """Buffer holding one agent's consecutive transitions t=1..n."""
    buf = ReplayBuffer(capacity)
    for t in range(1, n + 1):
        buf.push(tr(agent, t, r=float(t)))
    return buf


class TestReplayBuffer:
    def test_fifo_eviction(self):
        buf = ReplayBuffer(3)
        for t in range(1, 5):
            buf.push(tr(0, t, r=float(t)))
        assert len(buf) == 3
        live = [buf.get(int(c)).r for c in buf.live_counters()]
        assert live == [2.0, 3.0, 4.0]
        with pytest.raises(ConfigError):
            buf.get(0)  # first push evicted

    def test_eviction_after_capacity_plus_k(self):
        buf = ReplayBuffer(10)
        for t in range(1, 18):
            buf.push(tr(t % 3, t, r=float(t)))
        rewards = {buf.get(int(c)).r for c in buf.live_counters()}
        assert rewards == {float(t) for t in range(8, 18)}

    def test_single_item_sample(self):
        buf = ReplayBuffer(8)
        buf.push(tr(1, 1, r=0.25))
        batch = buf.sample_batch(1, np.random.default_rng(0))
        assert len(batch) == 1 and batch[0].r == 0.25

    def test_single_entry_repeats_when_oversampled(self):
        buf = ReplayBuffer(8)
        buf.push(tr(1, 1, r=0.25))
        batch = buf.sample_batch(256, np.random.default_rng(0))
        assert len(batch) == 256
        assert all(b.r == 0.25 for b in batch)

    def test_agent_chain_reconstruction(self):
        buf = seq_buffer(agent=7, n=5)
        chain = buf.chain(0, 5)
        assert chain is not None
        got = [buf.get(int(c)) for c in chain]
        assert [g.t for g in got] == [1, 2, 3, 4, 5]
        assert all(g.agent == 7 for g in got)

    def test_sampling_uniform_frequency(self):
        buf = ReplayBuffer(50)
        for t in range(1, 11):
            buf.push(tr(0, t))
        counters = buf.sample_counters(1_000_000, np.random.default_rng(1))
        counts = np.bincount(counters, minlength=10)
        sigma = np.sqrt(1_000_000 * 0.1 * 0.9)
        assert np.all(np.abs(counts - 100_000) < 3 * sigma)

    def test_sampling_deterministic(self):
        buf = seq_buffer()
        a = buf.sample_counters(64, np.random.default_rng(5))
        b = buf.sample_counters(64, np.random.default_rng(5))
        np.testing.assert_array_equal(a, b)

    def test_empty_buffer_sampling_rejected(self):
        with pytest.raises(ConfigError):
            ReplayBuffer(4).sample_counters(1, np.random.default_rng(0))

    def test_chain_broken_by_gap(self):
        buf = ReplayBuffer(50)
        buf.push(tr(3, 1))
        buf.push(tr(3, 2))
        buf.push(tr(3, 4))  # gap: no t=3
        assert buf.chain(0, 2) is not None
        assert buf.chain(0, 3) is None
        assert buf.chain(1, 2) is None

    def test_chain_broken_by_other_agent(self):
        buf = ReplayBuffer(50)
        buf.push(tr(3, 1))
        buf.push(tr(4, 2))
        assert buf.chain(0, 2) is None

    def test_chain_requires_live_members(self):
        buf = ReplayBuffer(4)
        for t in range(1, 4):
            buf.push(tr(0, t))
        assert buf.chain(0, 3) is not None
        buf.push(tr(0, 4))
        buf.push(tr(0, 5))  # evicts counter 0
        with pytest.raises(ConfigError):
            buf.chain(0, 2)
        # counter 1 (t=2) now heads a live 4-chain
        assert buf.chain(1, 4) is not None

    def test_chain_validity_matches_brute_force(self):
        # random interleaved pushes, then compare chain() with a rescan
        rng = np.random.default_rng(9)
        buf = ReplayBuffer(20)
        log = []  # (counter, agent, t)
        counter = 0
        next_t = {a: 1 for a in range(4)}
        for _ in range(60):
            agent = int(rng.integers(4))
            t = next_t[agent]
            if rng.random() < 0.2:
                t += int(rng.integers(1, 3))  # create occasional gaps
            next_t[agent] = t + 1
            buf.push(tr(agent, t))
            log.append((counter, agent, t))
            counter += 1
        live = {c: (a, t) for c, a, t in log if c >= counter - 20}
        for start in list(live)[:-1]:
            for n in (2, 3, 5):
                agent, t0 = live[start]
                want = []
                ok = True
                by_key = {(a, t): c for c, (a, t) in live.items()}
                for k in range(n):
                    c = by_key.get((agent, t0 + k))
                    if c is None:
                        ok = False
                        break
                    want.append(c)
                got = buf.chain(start, n)
                if ok:
                    assert got is not None and got.tolist() == want
                else:
                    assert got is None

    def test_mixed_state_dim_rejected(self):
        buf = ReplayBuffer(4)
        buf.push(tr(0, 1, dim=5))
        with pytest.raises(ConfigError):
            buf.push(tr(0, 2, dim=6))

    def test_transition_validation(self):
        with pytest.raises(ConfigError):
            Transition(0, 1, np.zeros(5), 0, float("nan"), np.zeros(5))
        with pytest.raises(ConfigError):
            Transition(0, 1, np.zeros(5), 0, 0.0, np.zeros(6))


def hand_net(b2_c, b2_d, input_dim=5, hidden=3):
    """Zero-weight network with chosen constant head outputs."""
    return NetParams(
        w1=np.zeros((hidden, input_dim)),
        b1=np.zeros(hidden),
        w2=np.zeros((2, hidden)),
        b2=np.array([b2_c, b2_d], dtype=np.float64),
    )


class TestTargets:
    def test_1step_hand_value(self):
        online = hand_net(1.0, 0.0)  # argmax at cooperate
        target = hand_net(2.0, 5.0)  # evaluates cooperate at 2
        y = double_dqn_target_1step(tr(0, 1, r=1.0), online, target, gamma=0.99)
        assert y == pytest.approx(2.98, abs=1e-12)

    def test_zero_gamma_returns_reward(self):
        online = hand_net(1.0, 0.0)
        target = hand_net(2.0, 5.0)
        y = double_dqn_target_1step(tr(0, 1, r=0.7), online, target, gamma=0.0)
        assert y == 0.7

    def test_identical_nets_reduce_to_max_target(self):
        rng = np.random.default_rng(2)
        for _ in range(25):
            net = init_params(5, 6, seed=int(rng.integers(1 << 30)))
            t0 = tr(0, 1, r=float(rng.standard_normal()))
            y = double_dqn_target_1step(t0, net, net, gamma=0.9)
            q, _ = forward(net, t0.s_next)
            assert y == t0.r + 0.9 * float(np.max(q))

    def test_nstep_geometric_sum(self):
        buf = ReplayBuffer(50)
        for t in range(1, 7):
            buf.push(tr(9, t, r=1.0))
        zero = hand_net(0.0, 0.0)
        y = nstep_target(buf, 0, 5, zero, zero, gamma=0.99)
        assert y == pytest.approx(4.90099501, abs=1e-8)
        assert y == pytest.approx(sum(0.99**k for k in range(5)), abs=1e-12)

    def test_nstep_falls_back_when_chain_short(self):
        buf = ReplayBuffer(50)
        buf.push(tr(9, 1))
        buf.push(tr(9, 2))
        zero = hand_net(0.0, 0.0)
        assert nstep_target(buf, 0, 5, zero, zero, gamma=0.99) is None

    def test_nstep_n1_equals_1step_bitwise(self):
        rng = np.random.default_rng(3)
        buf = ReplayBuffer(64)
        for t in range(1, 40):
            buf.push(
                Transition(
                    agent=int(rng.integers(3)),
                    t=t,
                    s=rng.standard_normal(5),
                    a=int(rng.integers(2)),
                    r=float(rng.standard_normal()),
                    s_next=rng.standard_normal(5),
                )
            )
        online = init_params(5, 8, seed=1)
        target = init_params(5, 8, seed=2)
        for c in buf.live_counters():
            y1 = double_dqn_target_1step(buf.get(int(c)), online, target, 0.99)
            yn = nstep_target(buf, int(c), 1, online, target, 0.99)
            assert yn == y1  # identical arithmetic, bit for bit

    def test_matches_direct_formula_oracle_bitwise(self):
        rng = np.random.default_rng(4)
        buf = ReplayBuffer(256)
        for t in range(1, 120):
            for agent in range(2):
                buf.push(
                    Transition(
                        agent=agent,
                        t=t,
                        s=rng.standard_normal(5),
                        a=int(rng.integers(2)),
                        r=float(rng.standard_normal()),
                        s_next=rng.standard_normal(5),
                    )
                )
        online = init_params(5, 8, seed=5)
        target = init_params(5, 8, seed=6)
        gamma = 0.97
        for c in buf.live_counters():
            t0 = buf.get(int(c))
            q_on = forward(online, t0.s_next)[0]
            q_tg = forward(target, t0.s_next)[0]
            want = target_1step_from_table(t0.r, q_on.tolist(), q_tg.tolist(), gamma)
            assert double_dqn_target_1step(t0, online, target, gamma) == want

            chain = buf.chain(int(c), 5)
            got = nstep_target(buf, int(c), 5, online, target, gamma)
            if chain is None:
                assert got is None
                continue
            rewards = [buf.get(int(cc)).r for cc in chain]
            boot = buf.get(int(chain[-1])).s_next
            want_n = target_nstep_from_table(
                rewards,
                forward(online, boot)[0].tolist(),
                forward(target, boot)[0].tolist(),
                gamma,
            )
            assert got == want_n

    def test_batched_targets_match_scalar_path(self):
        rng = np.random.default_rng(8)
        buf = ReplayBuffer(128)
        for t in range(1, 60):
            for agent in range(3):
                if rng.random() < 0.9:
                    buf.push(
                        Transition(
                            agent=agent,
                            t=t,
                            s=rng.standard_normal(5),
                            a=int(rng.integers(2)),
                            r=float(rng.standard_normal()),
                            s_next=rng.standard_normal(5),
                        )
                    )
        online = init_params(5, 8, seed=7)
        target = init_params(5, 8, seed=8)
        counters = buf.sample_counters(100, rng)
        batch = nstep_targets_batch(buf, counters, 5, online, target, 0.99)
        for i, c in enumerate(counters):
            scalar = nstep_target(buf, int(c), 5, online, target, 0.99)
            if scalar is None:
                scalar = double_dqn_target_1step(
                    buf.get(int(c)), online, target, 0.99
                )
            assert batch[i] == pytest.approx(scalar, abs=1e-12)


def make_group(gid=0, seed=0, members=None, capacity=512):
    online = init_params(5, 8, seed=seed)
    return PolicyGroup(
        group_id=gid,
        members=members if members is not None else np.arange(4),
        online=online,
        target=copy_params(online),
        optimizer=init_optimizer(OptimConfig(), online),
        buffer=ReplayBuffer(capacity),
    )


class TestTrainStep:
    def test_empty_buffer_skips(self):
        group = make_group()
        before = params_hash(group.online)
        out = train_step(group, TDConfig(batch_size=8), LossConfig(),
                         np.random.default_rng(0))
        assert out is None
        assert params_hash(group.online) == before
        assert group.optimizer.step_count == 0

    def test_warmup_requires_full_batch(self):
        group = make_group()
        for t in range(1, 5):
            group.buffer.push(tr(0, t))
        assert train_step(group, TDConfig(batch_size=8), LossConfig(),
                          np.random.default_rng(0)) is None
        for t in range(5, 9):
            group.buffer.push(tr(0, t))
        assert train_step(group, TDConfig(batch_size=8), LossConfig(),
                          np.random.default_rng(0)) is not None

    def test_zero_residual_leaves_only_weight_decay(self):
        group = make_group(seed=3)
        # constant-head nets dodge matmul rounding: predictions are exactly
        # b2[a], the zero target net contributes exactly 0, so storing
        # r = b2[a] makes every residual bitwise zero
        group.online = hand_net(0.37, -0.21)
        group.target = hand_net(0.0, 0.0)
        group.optimizer = init_optimizer(OptimConfig(), group.online)
        rng = np.random.default_rng(4)
        for t in range(1, 20):
            a = int(rng.integers(2))
            r = float(group.online.b2[a])
            group.buffer.push(
                Transition(0, t, rng.standard_normal(5), a, r,
                           rng.standard_normal(5))
            )
        cfg = TDConfig(batch_size=16, n_step=1)
        before = copy_params(group.online)
        loss = train_step(group, cfg, LossConfig(), np.random.default_rng(5))
        assert loss == 0.0
        wd = group.optimizer.cfg.lr * group.optimizer.cfg.weight_decay
        for a_before, a_after in zip(before.arrays(), group.online.arrays()):
            np.testing.assert_allclose(a_after, a_before * (1 - wd), atol=1e-16)

    def test_deterministic_given_seed(self):
        hashes = []
        for _ in range(2):
            group = make_group(seed=6)
            for t in range(1, 40):
                group.buffer.push(tr(0, t, r=0.1 * t, fill=0.3))
            train_step(group, TDConfig(batch_size=16), LossConfig(),
                       np.random.default_rng(11))
            hashes.append(params_hash(group.online))
        assert hashes[0] == hashes[1]

    def test_updates_only_this_group(self):
        groups = [make_group(gid=g, seed=g) for g in range(3)]
        for g in groups:
            for t in range(1, 40):
                g.buffer.push(tr(0, t, r=0.2))
        before = [params_hash(g.online) for g in groups]
        train_step(groups[1], TDConfig(batch_size=16), LossConfig(),
                   np.random.default_rng(0))
        after = [params_hash(g.online) for g in groups]
        assert after[1] != before[1]
        assert after[0] == before[0] and after[2] == before[2]


class TestTargetSync:
    def test_sync_at_interval(self):
        group = make_group(seed=9)
        group.online = init_params(5, 8, seed=10)  # drift
        assert maybe_sync_target(group, 2000, 2000) is True
        assert params_hash(group.target) == params_hash(group.online)

    def test_no_sync_off_interval(self):
        group = make_group(seed=9)
        old = params_hash(group.target)
        assert maybe_sync_target(group, 1999, 2000) is False
        assert params_hash(group.target) == old

    def test_resync_after_drift(self):
        group = make_group(seed=9)
        maybe_sync_target(group, 2000, 2000)
        group.online = init_params(5, 8, seed=12)
        assert maybe_sync_target(group, 4000, 2000) is True
        assert params_hash(group.target) == params_hash(group.online)

    def test_target_frozen_between_syncs(self):
        group = make_group(seed=13)
        for t in range(1, 80):
            group.buffer.push(tr(0, t, r=0.3, fill=0.5))
        frozen = params_hash(group.target)
        for t in range(1, 50):
            train_step(group, TDConfig(batch_size=16), LossConfig(),
                       np.random.default_rng(t))
            maybe_sync_target(group, t, interval=100)
        assert params_hash(group.target) == frozen


class TestAssignGroups:
    def test_even_partition_of_900(self):
        members = assign_groups(900, 10, np.random.default_rng(0))
        assert len(members) == 10
        assert all(m.size == 90 for m in members)
        combined = np.sort(np.concatenate(members))
        np.testing.assert_array_equal(combined, np.arange(900))

    def test_single_group_is_everyone(self):
        members = assign_groups(12, 1, np.random.default_rng(0))
        np.testing.assert_array_equal(members[0], np.arange(12))

    def test_deterministic(self):
        a = assign_groups(100, 7, np.random.default_rng(3))
        b = assign_groups(100, 7, np.random.default_rng(3))
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    def test_uneven_sizes_near_equal(self):
        members = assign_groups(10, 3, np.random.default_rng(1))
        assert sorted(m.size for m in members) == [3, 3, 4]

    def test_too_many_groups_rejected(self):
        with pytest.raises(ConfigError):
            assign_groups(5, 6, np.random.default_rng(0))
