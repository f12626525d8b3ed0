import numpy as np
import pytest

from blockplan.errors import ConfigError
from blockplan.executor import (
    EpisodeResult,
    ExecutionConfig,
    Extractor,
    _segment_last_indices,
    execute_segmentwise,
    run_episode,
    run_open_loop,
)
from blockplan.planner import Planner, PlannerConfig
from blockplan.submodels import ModelConfig
from blockplan.world import (
    Color,
    Corner,
    WorldConfig,
    WorldState,
    group_by_color,
    is_complete,
    make_line,
    move_to_area,
    reward,
    sample_initial_state,
)

EXACT_WORLD = WorldConfig(sigma_env=0.0)
EXACT_MODEL = ModelConfig(sigma_model=0.0)


def make_state(positions, colors=None):
    n = len(positions)
    if colors is None:
        colors = [list(Color)[i % 4] for i in range(n)]
    return WorldState(
        ids=tuple(range(n)),
        colors=tuple(colors),
        positions=np.array(positions, dtype=float),
        board=(0.6, 0.35),
    )


def exact_plan(state, goal, horizon, seed=0):
    from blockplan.submodels import simulator_submodels

    p = Planner(simulator_submodels(wcfg=EXACT_WORLD, mcfg=EXACT_MODEL))
    cfg = PlannerConfig(
        beams=1, text_branch=4, video_branch=1, horizon=horizon,
        policy_temperature=0.0, root_seed=seed,
    )
    return p.plan(state, goal, cfg)


class TestExecutionConfig:
    def test_defaults_match_protocol(self):
        cfg = ExecutionConfig()
        assert cfg.controls_per_frame == 4
        assert cfg.frames_per_plan == 16
        assert cfg.total_budget == 1500
        assert cfg.extractor is Extractor.GOAL_POLICY_EVERY_FRAME

    @pytest.mark.parametrize(
        "kwargs",
        [{"controls_per_frame": 0}, {"frames_per_plan": 0}, {"total_budget": 0}],
    )
    def test_rejects_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            ExecutionConfig(**kwargs)


class TestSegmentLastIndices:
    def test_sixteen_frame_segments(self):
        # Segments of 16 frames share junctions, so last frames sit at
        # 15, 30, 45, ... in the flattened sequence.
        assert _segment_last_indices(3, 16) == [15, 30, 45]

    def test_two_frame_segments(self):
        assert _segment_last_indices(4, 2) == [1, 2, 3, 4]


class TestExecuteSegmentwise:
    def test_every_frame_control_count(self):
        # Group goal with blocks of distinct colors is complete immediately;
        # use a line goal that stays unsatisfied so nothing stops early.
        s = make_state([(0.55, 0.3), (0.05, 0.05)])
        goal = move_to_area(Corner.BOTTOM_LEFT)
        plan = exact_plan(s, goal, horizon=2)
        trace = []
        cfg = ExecutionConfig(env_seed=1)
        out, issued = execute_segmentwise(
            s, plan, goal, cfg, EXACT_WORLD, EXACT_MODEL, trace=trace
        )
        # 16 frames x 4 controls, no early completion possible here.
        assert issued == 64
        assert len(trace) == 64
        assert not is_complete(out, goal)

    def test_inverse_dynamics_one_control_per_pair(self):
        s = make_state([(0.55, 0.3), (0.05, 0.05)])
        goal = move_to_area(Corner.BOTTOM_LEFT)
        plan = exact_plan(s, goal, horizon=2)
        cfg = ExecutionConfig(extractor=Extractor.INVERSE_DYNAMICS, env_seed=1)
        _, issued = execute_segmentwise(s, plan, goal, cfg, EXACT_WORLD, EXACT_MODEL)
        assert issued == 16

    def test_last_frame_targets_segment_ends(self):
        s = make_state([(0.55, 0.3), (0.05, 0.05)])
        goal = move_to_area(Corner.BOTTOM_LEFT)
        plan = exact_plan(s, goal, horizon=2)
        cfg = ExecutionConfig(extractor=Extractor.GOAL_POLICY_LAST_FRAME, env_seed=1)
        # Only the first segment's last frame (index 15) is within the
        # 16-frame window, so 4 controls are issued.
        _, issued = execute_segmentwise(s, plan, goal, cfg, EXACT_WORLD, EXACT_MODEL)
        assert issued == 4

    def test_noise_free_tracking_reaches_plan_end(self):
        # A single block and exact dynamics: tracking every plan frame lands
        # the env on the plan's 16th frame.
        s = make_state([(0.3, 0.3)])
        goal = move_to_area(Corner.BOTTOM_LEFT)
        plan = exact_plan(s, goal, horizon=1)
        cfg = ExecutionConfig(env_seed=1)
        out, _ = execute_segmentwise(s, plan, goal, cfg, EXACT_WORLD, EXACT_MODEL)
        assert np.allclose(out.positions, plan.frames()[15].positions, atol=1e-6)

    def test_budget_exhausted_noop(self):
        s = make_state([(0.3, 0.3)])
        goal = move_to_area(Corner.BOTTOM_LEFT)
        plan = exact_plan(s, goal, horizon=1)
        cfg = ExecutionConfig(env_seed=1)
        out, issued = execute_segmentwise(
            s, plan, goal, cfg, EXACT_WORLD, EXACT_MODEL, steps_used=1500
        )
        assert issued == 0 and out is s

    def test_budget_partial(self):
        s = make_state([(0.55, 0.3), (0.05, 0.05)])
        goal = move_to_area(Corner.BOTTOM_LEFT)
        plan = exact_plan(s, goal, horizon=2)
        cfg = ExecutionConfig(env_seed=1)
        _, issued = execute_segmentwise(
            s, plan, goal, cfg, EXACT_WORLD, EXACT_MODEL, steps_used=1490
        )
        assert issued == 10

    def test_stops_on_completion(self):
        s = make_state([(0.08, 0.08)])
        goal = move_to_area(Corner.BOTTOM_LEFT)
        plan = exact_plan(s, goal, horizon=1)
        cfg = ExecutionConfig(env_seed=1)
        out, issued = execute_segmentwise(s, plan, goal, cfg, EXACT_WORLD, EXACT_MODEL)
        assert is_complete(out, goal)
        assert issued < 64


class TestRunEpisode:
    PCFG = PlannerConfig(beams=2, text_branch=4, video_branch=4, horizon=2, root_seed=0)

    def test_completes_group_task(self):
        s = sample_initial_state(6, seed=11)
        res = run_episode(s, group_by_color(), self.PCFG, ExecutionConfig(env_seed=5))
        assert res.completed
        assert res.final_reward == 100.0
        assert 0 < res.steps_used <= 1500
        assert res.replan_count >= 1

    def test_budget_respected(self):
        s = sample_initial_state(6, seed=11)
        ecfg = ExecutionConfig(total_budget=40, env_seed=5)
        res = run_episode(s, group_by_color(), self.PCFG, ecfg)
        assert res.steps_used <= 40

    def test_already_complete_zero_steps(self):
        s = sample_initial_state(4, seed=0)  # four distinct colors: vacuous
        res = run_episode(s, group_by_color(), self.PCFG, ExecutionConfig())
        assert res.completed and res.steps_used == 0 and res.replan_count == 0

    def test_deterministic(self):
        s = sample_initial_state(6, seed=3)
        ecfg = ExecutionConfig(env_seed=9)
        a = run_episode(s, group_by_color(), self.PCFG, ecfg, collect_trace=True)
        b = run_episode(s, group_by_color(), self.PCFG, ecfg, collect_trace=True)
        assert a.final_reward == b.final_reward
        assert a.steps_used == b.steps_used
        assert a.trace == b.trace

    def test_trace_shape(self):
        s = sample_initial_state(6, seed=3)
        res = run_episode(
            s, group_by_color(), self.PCFG, ExecutionConfig(env_seed=9), collect_trace=True
        )
        kinds = [r["kind"] for r in res.trace]
        assert kinds[0] == "PlanStep"
        assert kinds[-1] == "EpisodeEnd"
        n_controls = sum(1 for k in kinds if k == "Control")
        assert n_controls == res.steps_used
        assert sum(1 for k in kinds if k == "PlanStep") == res.replan_count
        end = res.trace[-1]
        assert end["reward"] == res.final_reward
        assert end["completed"] == res.completed

    def test_trace_steps_monotone(self):
        s = sample_initial_state(6, seed=3)
        res = run_episode(
            s, group_by_color(), self.PCFG, ExecutionConfig(env_seed=9), collect_trace=True
        )
        steps = [r["step"] for r in res.trace if r["kind"] == "Control"]
        assert steps == list(range(1, len(steps) + 1))


class TestOpenLoop:
    def test_underperforms_closed_loop(self):
        pcfg = PlannerConfig(beams=2, text_branch=4, video_branch=4, horizon=2, root_seed=0)
        goal = group_by_color()
        closed_wins = 0
        for ep in range(5):
            s = sample_initial_state(6, seed=100 + ep)
            ecfg = ExecutionConfig(env_seed=ep)
            closed = run_episode(s, goal, pcfg, ecfg)
            open_ = run_open_loop(s, goal, pcfg, ecfg)
            assert closed.final_reward >= open_.final_reward
            if closed.final_reward > open_.final_reward:
                closed_wins += 1
        assert closed_wins >= 3

    def test_single_plan(self):
        s = sample_initial_state(6, seed=2)
        pcfg = PlannerConfig(beams=1, horizon=2, root_seed=0)
        res = run_open_loop(s, group_by_color(), pcfg, ExecutionConfig(env_seed=1))
        assert res.replan_count == 1

    def test_complete_start_shortcut(self):
        s = sample_initial_state(4, seed=0)
        res = run_open_loop(s, group_by_color(), PlannerConfig(), ExecutionConfig())
        assert res == EpisodeResult(100.0, True, 0, 0)
