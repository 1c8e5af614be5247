import math

import numpy as np
import pytest

from robustflow import (
    DemandMatrix,
    LatencyConfig,
    LatencyKind,
    Network,
    Status,
    eval_latency,
    load_balance_from_throughput,
    solve_latency_linear,
    solve_throughput,
)
from robustflow.errors import InfeasibleSystem, SaturatedEdge, ZeroThroughput
from robustflow.flows import VariableMap, build_throughput_tableau
from robustflow.network import demand_laplacian, incidence_matrix
from robustflow.simplex import primal_simplex

from conftest import (
    brute_force_lp,
    cold_throughput,
    random_corpus,
    throughput_standard_form,
)


class TestBuildThroughputTableau:
    def test_net_b_layout(self, net_b, demand_ab):
        tableau, vm = build_throughput_tableau(net_b, demand_ab)
        # 2 flow variables + 1 slack + lambda; starting vertex F=0, slack=3
        assert vm.n_vars == 4
        assert tableau.is_primal_feasible()
        point = tableau.solution_point()
        assert np.abs(vm.flow_matrix(point)).max() == 0.0
        assert point[vm.slack_index(0)] == pytest.approx(3.0)

    def test_net_c_rhs_is_capacities(self, net_c, demand_c):
        tableau, vm = build_throughput_tableau(net_c, demand_c)
        point = tableau.solution_point()
        for e in range(3):
            assert point[vm.slack_index(e)] == pytest.approx(1.0)
        assert np.abs(vm.flow_matrix(point)).max() == 0.0

    def test_zero_demand_rejected(self, net_b):
        with pytest.raises(InfeasibleSystem):
            build_throughput_tableau(net_b, DemandMatrix(np.zeros((2, 2))))

    def test_disconnected_demand_rejected(self):
        net = Network(4, [(0, 1, 1.0, 0.0), (2, 3, 1.0, 0.0)])
        demands = DemandMatrix(
            [[0.0, 0.0, 1.0, 0.0], [0.0] * 4, [0.0] * 4, [0.0] * 4]
        )
        with pytest.raises(InfeasibleSystem):
            build_throughput_tableau(net, demands)

    def test_starting_vertex_never_needs_phase_one(self):
        for net, demands in random_corpus(seed=31, count=10):
            tableau, _ = build_throughput_tableau(net, demands)
            assert tableau.is_primal_feasible()
            assert primal_simplex(tableau).status is Status.OPTIMAL


class TestSolveThroughput:
    def test_corpus_values(self, net_a, net_b, net_c, demand_ab, demand_c):
        assert solve_throughput(net_b, demand_ab).lambda_star == pytest.approx(0.75)
        assert solve_throughput(net_a, demand_ab).lambda_star == pytest.approx(1.25)
        assert solve_throughput(net_c, demand_c).lambda_star == pytest.approx(1.0)

    def test_flows_satisfy_constraints(self, net_c, demand_c):
        sol = solve_throughput(net_c, demand_c)
        flows = sol.flows
        assert (flows >= -1e-8).all()
        assert (flows.sum(axis=1) <= net_c.capacities + 1e-8).all()
        balance = incidence_matrix(net_c) @ flows
        expected = -sol.lambda_star * demand_laplacian(demand_c)
        np.testing.assert_allclose(balance, expected, atol=1e-8)

    def test_matches_brute_force_on_small_corpus(self, net_a, net_b, net_c,
                                                 demand_ab, demand_c):
        for net, demands in [(net_a, demand_ab), (net_b, demand_ab),
                             (net_c, demand_c)]:
            status, value = brute_force_lp(throughput_standard_form(net, demands))
            assert status == "optimal"
            sol = solve_throughput(net, demands)
            assert sol.lambda_star == pytest.approx(-value, abs=1e-9)

    def test_capacity_scaling(self):
        for net, demands in random_corpus(seed=41, count=6):
            base = solve_throughput(net, demands).lambda_star
            scaled = solve_throughput(net, demands,
                                      b_override=2.5 * net.capacities).lambda_star
            assert scaled == pytest.approx(2.5 * base, abs=1e-8)

    def test_demand_scaling(self):
        for net, demands in random_corpus(seed=43, count=6):
            base = solve_throughput(net, demands).lambda_star
            tripled = DemandMatrix(3.0 * demands.entries)
            assert solve_throughput(net, tripled).lambda_star == pytest.approx(
                base / 3.0, abs=1e-8
            )

    def test_zero_throughput_when_no_directed_path(self):
        # edge points away from the demand direction; weakly connected
        net = Network(2, [(1, 0, 1.0, 0.0)])
        demands = DemandMatrix([[0.0, 4.0], [0.0, 0.0]])
        assert solve_throughput(net, demands).lambda_star == pytest.approx(0.0)


class TestLoadBalance:
    def test_net_a_theta(self, net_a, demand_ab):
        sol = solve_throughput(net_a, demand_ab)
        theta, _ = load_balance_from_throughput(sol)
        assert theta == pytest.approx(0.8)

    def test_lambda_one_is_fixed_point(self, net_c, demand_c):
        sol = solve_throughput(net_c, demand_c)
        theta, flows = load_balance_from_throughput(sol)
        assert theta == pytest.approx(1.0)
        np.testing.assert_allclose(flows, sol.flows)

    def test_net_b_flows_exceed_capacity(self, net_b, demand_ab):
        sol = solve_throughput(net_b, demand_ab)
        theta, flows = load_balance_from_throughput(sol)
        assert theta == pytest.approx(4.0 / 3.0)
        assert flows.sum() == pytest.approx(4.0)

    def test_zero_throughput_raises(self):
        net = Network(2, [(1, 0, 1.0, 0.0)])
        demands = DemandMatrix([[0.0, 4.0], [0.0, 0.0]])
        sol = solve_throughput(net, demands)
        with pytest.raises(ZeroThroughput):
            load_balance_from_throughput(sol)

    def test_lemma_product_on_random_corpus(self):
        for net, demands in random_corpus(seed=47, count=8):
            sol = solve_throughput(net, demands)
            if sol.lambda_star <= 1e-12:
                continue
            theta, _ = load_balance_from_throughput(sol)
            assert sol.lambda_star * theta == pytest.approx(1.0, abs=1e-9)


class TestLatencyLinear:
    def test_net_b_single_path(self, net_b, demand_ab):
        cfg = LatencyConfig(LatencyKind.LINEAR, beta=0.9)
        lam = solve_throughput(net_b, demand_ab).lambda_star
        sol = solve_latency_linear(net_b, demand_ab, cfg, lam)
        assert sol.latency == pytest.approx(2.0, abs=1e-9)

    def test_zero_delays_give_zero_latency(self, net_a, demand_ab):
        cfg = LatencyConfig(LatencyKind.LINEAR, beta=0.9)
        lam = solve_throughput(net_a, demand_ab).lambda_star
        sol = solve_latency_linear(net_a, demand_ab, cfg, lam)
        assert sol.latency == pytest.approx(0.0, abs=1e-12)

    def test_net_c_splits_over_paths(self, net_c, demand_c):
        cfg = LatencyConfig(LatencyKind.LINEAR, beta=0.9)
        lam = solve_throughput(net_c, demand_c).lambda_star
        sol = solve_latency_linear(net_c, demand_c, cfg, lam)
        assert sol.latency == pytest.approx(17.0 / 1.8, abs=1e-9)

    def test_flows_route_the_pinned_fraction(self, net_c, demand_c):
        cfg = LatencyConfig(LatencyKind.LINEAR, beta=0.9)
        lam = solve_throughput(net_c, demand_c).lambda_star
        sol = solve_latency_linear(net_c, demand_c, cfg, lam)
        balance = incidence_matrix(net_c) @ sol.flows
        expected = -cfg.beta * lam * demand_laplacian(demand_c)
        np.testing.assert_allclose(balance, expected, atol=1e-8)

    def test_beta_one_stays_feasible(self, net_a, demand_ab):
        cfg = LatencyConfig(LatencyKind.LINEAR, beta=1.0)
        lam = solve_throughput(net_a, demand_ab).lambda_star
        sol = solve_latency_linear(net_a, demand_ab, cfg, lam)
        assert sol.latency >= -1e-12

    def test_rejects_nonlinear_kind(self, net_b, demand_ab):
        cfg = LatencyConfig(LatencyKind.INVERSE)
        with pytest.raises(ValueError):
            solve_latency_linear(net_b, demand_ab, cfg, 0.75)

    def test_matches_cold_solve_value(self, net_c, demand_c):
        # cross-check the pinned warm path against an independent LP solve
        cfg = LatencyConfig(LatencyKind.LINEAR, beta=0.9)
        lam = solve_throughput(net_c, demand_c).lambda_star
        warm = solve_latency_linear(net_c, demand_c, cfg, lam)
        lp = throughput_standard_form(net_c, demand_c)
        # pin lambda by fixing its column: move it to the rhs
        target = cfg.beta * lam
        vm = VariableMap(net_c.n_edges, net_c.n_vertices)
        pinned_rhs = lp.eq_rhs - target * lp.eq_matrix[:, vm.lambda_index]
        keep = np.arange(lp.cost.size) != vm.lambda_index
        cost = np.zeros(lp.cost.size)
        for s in range(net_c.n_vertices):
            cost[s * net_c.n_edges:(s + 1) * net_c.n_edges] = net_c.delays
        from robustflow import StandardFormLP, solve_standard_form

        cold = solve_standard_form(
            StandardFormLP(cost[keep], lp.eq_matrix[:, keep], pinned_rhs)
        )
        assert cold.status is Status.OPTIMAL
        denom = target * demand_c.total()
        assert warm.latency == pytest.approx(cold.objective / denom, abs=1e-9)


class TestEvalLatency:
    def one_edge_net(self):
        return Network(2, [(0, 1, 2.0, 1.0)])

    def test_zero_flow_all_kinds(self):
        net = self.one_edge_net()
        f = np.zeros(1)
        assert eval_latency(f, net, LatencyConfig(LatencyKind.LINEAR)) == 0.0
        assert eval_latency(f, net, LatencyConfig(LatencyKind.INVERSE, alpha_c=1.0)) == 0.0
        assert eval_latency(f, net, LatencyConfig(LatencyKind.LOG)) == pytest.approx(1.0)

    def test_inverse_half_load(self):
        net = self.one_edge_net()
        cfg = LatencyConfig(LatencyKind.INVERSE, alpha_c=1.0)
        assert eval_latency(np.array([1.0]), net, cfg) == pytest.approx(2.0)

    def test_inverse_applies_alpha_c(self):
        net = self.one_edge_net()
        cfg = LatencyConfig(LatencyKind.INVERSE, alpha_c=1e-6)
        assert eval_latency(np.array([1.0]), net, cfg) == pytest.approx(2e-6)

    def test_log_half_load(self):
        net = self.one_edge_net()
        cfg = LatencyConfig(LatencyKind.LOG)
        expected = 1.0 - math.log(0.5)
        assert eval_latency(np.array([1.0]), net, cfg) == pytest.approx(expected)

    def test_saturated_edge_raises(self):
        net = self.one_edge_net()
        for kind in (LatencyKind.INVERSE, LatencyKind.LOG):
            with pytest.raises(SaturatedEdge):
                eval_latency(np.array([2.0]), net, LatencyConfig(kind))

    def test_linear_allows_saturation(self):
        net = self.one_edge_net()
        assert eval_latency(np.array([2.0]), net,
                            LatencyConfig(LatencyKind.LINEAR)) == pytest.approx(2.0)

    def test_monotone_in_flow(self):
        net = self.one_edge_net()
        grid = np.linspace(0.0, 1.9, 20)
        for kind, alpha in ((LatencyKind.LINEAR, 1.0), (LatencyKind.INVERSE, 1.0),
                            (LatencyKind.LOG, 1.0)):
            cfg = LatencyConfig(kind, alpha_c=alpha)
            values = [eval_latency(np.array([f]), net, cfg) for f in grid]
            assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))

    def test_inverse_blows_up_near_capacity(self):
        net = self.one_edge_net()
        cfg = LatencyConfig(LatencyKind.INVERSE, alpha_c=1.0)
        assert eval_latency(np.array([2.0 - 1e-9]), net, cfg) > 1e8


class TestLatencyConfig:
    def test_rejects_bad_beta(self):
        with pytest.raises(ValueError):
            LatencyConfig(beta=0.0)
        with pytest.raises(ValueError):
            LatencyConfig(beta=1.5)

    def test_rejects_bad_alpha(self):
        with pytest.raises(ValueError):
            LatencyConfig(alpha_c=0.0)


def test_warm_throughput_matches_cold_on_random_corpus():
    for net, demands in random_corpus(seed=53, count=6):
        warm = solve_throughput(net, demands).lambda_star
        assert warm == pytest.approx(cold_throughput(net, demands), abs=1e-9)
