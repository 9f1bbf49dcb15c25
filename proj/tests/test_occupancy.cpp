#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "rewardlab/mdp.hpp"
#include "rewardlab/occupancy.hpp"
#include "rewardlab/random.hpp"

using namespace rewardlab;

TEST_CASE("single self-loop state embeds to the full discounted mass") {
    Mat transition(1, 1);
    transition << 1.0;
    Vec initial(1);
    initial << 1.0;
    const TabularMdp mdp({"s"}, {"a"}, transition, initial, 0.9);
    const OccupancyVector occ = embed_policy(mdp, StationaryPolicy::uniform(1, 1));
    REQUIRE(occ.mass.size() == 1);
    CHECK(occ.mass[0] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("bandit occupancy splits the mass by action probability") {
    const Momdp bandit = testlab::bandit_momdp();
    for (double p : {0.0, 0.3, 0.5, 1.0}) {
        Mat probs(1, 2);
        probs << p, 1.0 - p;
        const OccupancyVector occ = embed_policy(bandit.mdp(), StationaryPolicy(probs));
        CHECK(occ.mass[0] == doctest::Approx(2.0 * p).epsilon(1e-12));
        CHECK(occ.mass[1] == doctest::Approx(2.0 - 2.0 * p).epsilon(1e-12));
    }
}

TEST_CASE("occupancy reproduces J for random rewards and conserves total mass") {
    const Momdp momdp = testlab::random_momdp(5, 5, 3, 1);
    const TabularMdp& mdp = momdp.mdp();
    RandomStream rng = RandomStream::derive(5, "occ_rewards", 0);

    for (std::uint64_t pseed = 0; pseed < 4; ++pseed) {
        const StationaryPolicy policy = testlab::random_policy(5, 3, pseed);
        const OccupancyVector occ = embed_policy(mdp, policy);
        CHECK(occ.total() == doctest::Approx(1.0 / (1.0 - mdp.gamma())).epsilon(1e-10));
        CHECK(occ.mass.minCoeff() >= -1e-12);

        for (int trial = 0; trial < 20; ++trial) {
            Mat values(5, 3);
            for (int s = 0; s < 5; ++s)
                for (int a = 0; a < 3; ++a) values(s, a) = rng.uniform(-2.0, 2.0);
            const RewardTable reward{values};
            CHECK(std::abs(reward.flat().dot(occ.mass) -
                           evaluate_policy(mdp, reward, policy).j) < 1e-9);
        }
    }
}

TEST_CASE("J is linear in the reward table") {
    const Momdp momdp = testlab::random_momdp(9, 4, 2, 2);
    const StationaryPolicy policy = testlab::random_policy(4, 2, 3);
    const RewardTable& r1 = momdp.rewards()[0];
    const RewardTable& r2 = momdp.rewards()[1];
    const double j1 = evaluate_policy(momdp.mdp(), r1, policy).j;
    const double j2 = evaluate_policy(momdp.mdp(), r2, policy).j;
    const RewardTable mixed(Mat(0.6 * r1.values() + 1.7 * r2.values()));
    CHECK(std::abs(evaluate_policy(momdp.mdp(), mixed, policy).j - (0.6 * j1 + 1.7 * j2)) < 1e-9);
}

TEST_CASE("trajectory embeddings: constant, alternating, and one-step") {
    SUBCASE("constant trajectory carries mass 2 on its transition") {
        Trajectory traj;
        traj.steps = {{1, 0}};
        traj.tail = TailRule::RepeatLast;
        const OccupancyVector occ = embed_trajectory(traj, 0.5, 3, 2);
        CHECK(occ.mass[sa_index(1, 0, 2)] == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(occ.total() == doctest::Approx(2.0).epsilon(1e-12));
    }

    SUBCASE("alternating trajectory splits mass 4/3 and 2/3 by parity") {
        // A long truncated prefix stands in for the infinite alternation; at
        // gamma = 0.5 the dropped tail is below 1e-18.
        Trajectory traj;
        for (int t = 0; t < 60; ++t) traj.steps.push_back(t % 2 == 0 ? std::pair{0, 0}
                                                                     : std::pair{1, 1});
        traj.tail = TailRule::ZeroAfter;
        const OccupancyVector occ = embed_trajectory(traj, 0.5, 2, 2);
        CHECK(occ.mass[sa_index(0, 0, 2)] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
        CHECK(occ.mass[sa_index(1, 1, 2)] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    }

    SUBCASE("zero-tail single step has unit mass") {
        Trajectory traj;
        traj.steps = {{2, 1}};
        traj.tail = TailRule::ZeroAfter;
        const OccupancyVector occ = embed_trajectory(traj, 0.7, 3, 2);
        CHECK(occ.mass[sa_index(2, 1, 2)] == doctest::Approx(1.0));
        CHECK(occ.total() == doctest::Approx(1.0));
    }
}

TEST_CASE("trajectory return equals the reward/occupancy inner product") {
    RandomStream rng = RandomStream::derive(12, "traj_probe", 0);
    for (int trial = 0; trial < 20; ++trial) {
        Trajectory traj;
        const int len = 1 + rng.next_int(8);
        for (int t = 0; t < len; ++t) traj.steps.emplace_back(rng.next_int(3), rng.next_int(2));
        traj.tail = trial % 2 == 0 ? TailRule::RepeatLast : TailRule::ZeroAfter;

        Mat values(3, 2);
        for (int s = 0; s < 3; ++s)
            for (int a = 0; a < 2; ++a) values(s, a) = rng.uniform(-1.0, 1.0);
        const RewardTable reward{values};

        const double gamma = 0.5 + 0.4 * rng.next_double();
        const OccupancyVector occ = embed_trajectory(traj, gamma, 3, 2);
        CHECK(std::abs(reward.flat().dot(occ.mass) - trajectory_return(traj, reward, gamma)) <
              1e-9);
    }
}

TEST_CASE("reward_matrix stacks the flattened reward rows") {
    const Momdp momdp = testlab::random_momdp(2, 3, 2, 2);
    const Mat m = reward_matrix(momdp);
    REQUIRE(m.rows() == 2);
    REQUIRE(m.cols() == 6);
    CHECK((m.row(0).transpose() - momdp.rewards()[0].flat()).norm() == 0.0);
    CHECK((m.row(1).transpose() - momdp.rewards()[1].flat()).norm() == 0.0);
}

TEST_CASE("affine hull dimensions on bandit families") {
    Mat transition2(2, 1);
    transition2 << 1.0, 1.0;
    Vec initial(1);
    initial << 1.0;
    const TabularMdp two_arm({"s"}, {"a", "b"}, transition2, initial, 0.5);
    CHECK(affine_hull_of_policies(two_arm, 20, 1).dim == 1);

    Mat transition3(3, 1);
    transition3 << 1.0, 1.0, 1.0;
    const TabularMdp three_arm({"s"}, {"a", "b", "c"}, transition3, initial, 0.5);
    CHECK(affine_hull_of_policies(three_arm, 20, 1).dim == 2);
}

TEST_CASE("1000 holdout policies embed inside the hull") {
    const Momdp momdp = testlab::random_momdp(31, 4, 2, 1);
    const AffineHull hull = affine_hull_of_policies(momdp.mdp(), 60, 7);
    CHECK(hull.dim <= momdp.mdp().num_pairs() - 1);
    for (int i = 0; i < 1000; ++i) {
        const StationaryPolicy policy =
            testlab::random_policy(4, 2, 5000 + static_cast<std::uint64_t>(i));
        CHECK(hull.contains(embed_policy(momdp.mdp(), policy).mass, 1e-8));
    }
}

TEST_CASE("hull basis is orthonormal") {
    const Momdp momdp = testlab::random_momdp(77, 3, 3, 1);
    const AffineHull hull = affine_hull_of_policies(momdp.mdp(), 40, 3);
    const Mat gram = hull.basis.transpose() * hull.basis;
    CHECK((gram - Mat::Identity(hull.dim, hull.dim)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("interior policies admit small in-hull steps that stay realizable") {
    const Momdp momdp = testlab::random_momdp(13, 3, 2, 1);
    const TabularMdp& mdp = momdp.mdp();
    const AffineHull hull = affine_hull_of_policies(mdp, 40, 11);

    // Strictly interior policy: every action probability at least 0.05.
    Mat probs(3, 2);
    probs << 0.4, 0.6, 0.15, 0.85, 0.7, 0.3;
    const StationaryPolicy interior{probs};
    const Vec m = embed_policy(mdp, interior).mass;

    RandomStream rng = RandomStream::derive(13, "hull_direction", 0);
    for (int trial = 0; trial < 5; ++trial) {
        Vec coeffs(hull.dim);
        for (int i = 0; i < hull.dim; ++i) coeffs[i] = rng.uniform(-1.0, 1.0);
        if (coeffs.norm() == 0.0) continue;
        const Vec direction = (hull.basis * coeffs).normalized();

        bool realized = false;
        for (double alpha : {1e-3, 1e-4, 1e-5}) {
            const Vec stepped = m + alpha * direction;
            if (stepped.minCoeff() < 0.0) continue;
            const StationaryPolicy candidate =
                policy_from_occupancy({stepped, mdp.gamma()}, 3, 2);
            const Vec back = embed_policy(mdp, candidate).mass;
            if ((back - stepped).lpNorm<Eigen::Infinity>() < 1e-8) {
                realized = true;
                break;
            }
        }
        CHECK(realized);
    }
}

TEST_CASE("policy_from_occupancy inverts embed_policy") {
    const Momdp momdp = testlab::random_momdp(21, 4, 3, 1);
    const StationaryPolicy policy = testlab::random_policy(4, 3, 99);
    const OccupancyVector occ = embed_policy(momdp.mdp(), policy);
    const StationaryPolicy recovered = policy_from_occupancy(occ, 4, 3);
    CHECK((recovered.probs() - policy.probs()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("state occupancy matches the row sums of the embedding") {
    const Momdp momdp = testlab::random_momdp(8, 4, 2, 1);
    const StationaryPolicy policy = testlab::random_policy(4, 2, 8);
    const Vec d = state_occupancy(momdp.mdp(), policy);
    const OccupancyVector occ = embed_policy(momdp.mdp(), policy);
    for (int s = 0; s < 4; ++s) {
        double row = 0.0;
        for (int a = 0; a < 2; ++a) row += occ.mass[sa_index(s, a, 2)];
        CHECK(d[s] == doctest::Approx(row).epsilon(1e-10));
    }
}

TEST_CASE("occupancy CSV dump has a header and one row per pair") {
    const Momdp bandit = testlab::bandit_momdp();
    const OccupancyVector occ = embed_policy(bandit.mdp(), StationaryPolicy::uniform(1, 2));
    std::ostringstream out;
    write_occupancy_csv(out, occ, bandit.mdp());
    const std::string text = out.str();
    CHECK(text.find("state") != std::string::npos);
    CHECK(std::count(text.begin(), text.end(), '\n') == 3); // header + two pairs
}
