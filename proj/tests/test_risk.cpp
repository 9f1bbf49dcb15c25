#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "oracles.hpp"
#include "rewardlab/errors.hpp"
#include "rewardlab/mdp.hpp"
#include "rewardlab/risk.hpp"

using namespace rewardlab;

TEST_CASE("transform closed forms and domains") {
    CHECK(apply_transform(UtilityTransform::affine(1.0, 0.0), 5.0) == doctest::Approx(5.0));
    CHECK(apply_transform(UtilityTransform::affine(2.0, 3.0), 1.5) == doctest::Approx(6.0));
    CHECK(apply_transform(UtilityTransform::quadratic(0.1), 2.0) == doctest::Approx(1.6));
    CHECK(apply_transform(UtilityTransform::logarithmic(), 1.0) == doctest::Approx(0.0));
    CHECK(apply_transform(UtilityTransform::exponential(1.0), 0.0) == doctest::Approx(-1.0));
    // Isoelastic at alpha = 0.5: (sqrt(g) - 1) / 0.5.
    CHECK(apply_transform(UtilityTransform::isoelastic(0.5), 4.0) == doctest::Approx(2.0));

    CHECK_THROWS_AS(apply_transform(UtilityTransform::logarithmic(), 0.0), DomainError);
    CHECK_THROWS_AS(apply_transform(UtilityTransform::isoelastic(0.5), -1.0), DomainError);
    CHECK_THROWS_AS(apply_transform(UtilityTransform::quadratic(0.1), 6.0), DomainError);
}

TEST_CASE("transform parameter validation") {
    CHECK_THROWS_AS(UtilityTransform::exponential(0.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(UtilityTransform::isoelastic(1.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(UtilityTransform::quadratic(-0.5).validate(), std::invalid_argument);
    CHECK_THROWS_AS(UtilityTransform::affine(-1.0, 0.0).validate(), std::invalid_argument);
    CHECK_NOTHROW(UtilityTransform::affine(0.5, -2.0).validate());
    CHECK(transform_kind_from_name("isoelastic") == TransformKind::Isoelastic);
    CHECK_THROWS_AS(transform_kind_from_name("cubic"), ParseError);
}

TEST_CASE("greedy digits in base 1/gamma") {
    SUBCASE("1.5 at gamma 0.5 opens with two ones") {
        const DigitTrajectory d = digits_base_inv_gamma(1.5, 0.5);
        REQUIRE(d.digits.size() >= 2);
        CHECK(d.digits[0] == 1);
        CHECK(d.digits[1] == 1);
        for (std::size_t k = 2; k < d.digits.size(); ++k) CHECK(d.digits[k] == 0);
        CHECK(d.partial_mass(0.5) == doctest::Approx(1.5).epsilon(1e-12));
    }

    SUBCASE("the full mass is all ones") {
        const DigitTrajectory d = digits_base_inv_gamma(2.0, 0.5);
        for (int digit : d.digits) CHECK(digit == 1);
    }

    SUBCASE("2/3 alternates") {
        const DigitTrajectory d = digits_base_inv_gamma(2.0 / 3.0, 0.5);
        for (std::size_t k = 0; k < d.digits.size(); ++k) CHECK(d.digits[k] == (k % 2 == 0 ? 0 : 1));
    }

    SUBCASE("partial sums are monotone, bounded by alpha, and near it at the end") {
        for (double gamma : {0.5, 0.7, 0.9}) {
            const double cap = 1.0 / (1.0 - gamma);
            for (int i = 1; i < 8; ++i) {
                const double alpha = cap * i / 8.0;
                const DigitTrajectory d = digits_base_inv_gamma(alpha, gamma);
                double sum = 0.0, power = 1.0;
                for (int digit : d.digits) {
                    sum += digit * power;
                    power *= gamma;
                    CHECK(sum <= alpha + 1e-15);
                }
                const double tail = std::pow(gamma, static_cast<double>(d.digits.size())) /
                                    (1.0 - gamma);
                CHECK(tail <= 1e-9);
                CHECK(std::abs(sum - alpha) <= tail + 1e-15);
            }
        }
    }

    SUBCASE("hypothesis guards") {
        CHECK_THROWS_AS(digits_base_inv_gamma(0.5, 0.4), GuardError);
        CHECK_THROWS_AS(digits_base_inv_gamma(-0.1, 0.5), GuardError);
        CHECK_THROWS_AS(digits_base_inv_gamma(2.1, 0.5), GuardError);
    }
}

TEST_CASE("digit trajectories realize their digit mass as a return") {
    DigitTrajectory d = digits_base_inv_gamma(1.25, 0.5);
    d.transition_one = sa_index(0, 1, 2);
    d.transition_zero = sa_index(1, 0, 2);
    const Trajectory traj = digit_trajectory_path(d, 2);

    Mat indicator = Mat::Zero(2, 2);
    indicator(0, 1) = 1.0; // reward only on the one-digit transition
    CHECK(trajectory_return(traj, RewardTable(indicator), 0.5) ==
          doctest::Approx(d.partial_mass(0.5)).epsilon(1e-9));

    DigitTrajectory unset;
    unset.digits = {1};
    CHECK_THROWS_AS(digit_trajectory_path(unset, 2), std::invalid_argument);
}

TEST_CASE("affine transforms are realizable with the predicted reward") {
    const Momdp momdp = testlab::random_momdp(61, 3, 2, 1);
    const TabularMdp& mdp = momdp.mdp();
    const RewardTable& r1 = momdp.rewards()[0];
    const UtilityTransform affine = UtilityTransform::affine(2.0, 3.0);

    const TransformFeasibility feasibility = check_transform_realizable(mdp, r1, affine, 40, 5);
    REQUIRE(feasibility.outcome == FeasibilityOutcome::Realizable);
    REQUIRE(feasibility.reward.has_value());
    CHECK(feasibility.residual < 1e-7);
    CHECK(feasibility.holdout_residual < 1e-6);
    CHECK_FALSE(feasibility.outside_regime);

    // G2 = 2 G1 + 3 on fresh trajectories, and the table matches the
    // constant-shift construction R2 = 2 R1 + 3 (1 - gamma).
    RandomStream rng = RandomStream::derive(61, "fresh_traj", 1);
    for (int trial = 0; trial < 30; ++trial) {
        Trajectory traj;
        const int len = 1 + rng.next_int(10);
        for (int t = 0; t < len; ++t) traj.steps.emplace_back(rng.next_int(3), rng.next_int(2));
        traj.tail = TailRule::RepeatLast;
        const double g1 = trajectory_return(traj, r1, mdp.gamma());
        const double g2 = trajectory_return(traj, *feasibility.reward, mdp.gamma());
        CHECK(g2 == doctest::Approx(2.0 * g1 + 3.0).epsilon(1e-7));
    }
    const Mat predicted = (2.0 * r1.values().array() + 3.0 * (1.0 - mdp.gamma())).matrix();
    CHECK((feasibility.reward->values() - predicted).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("the exponential transform is infeasible on the bandit skeleton") {
    const Momdp bandit = testlab::bandit_momdp();
    const TransformFeasibility feasibility = check_transform_realizable(
        bandit.mdp(), bandit.rewards()[0], UtilityTransform::exponential(1.0), 40, 7);
    REQUIRE(feasibility.outcome == FeasibilityOutcome::Infeasible);
    CHECK(feasibility.residual > 1e-5);
    CHECK(feasibility.certificate > 0.0);
    CHECK(feasibility.certificate <= feasibility.residual + 1e-12);
}

TEST_CASE("a constant base reward makes every transform realizable") {
    Mat transition(4, 2);
    transition << 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0;
    Vec initial(2);
    initial << 0.5, 0.5;
    const TabularMdp mdp({"x", "y"}, {"a", "b"}, transition, initial, 0.5);
    const RewardTable constant(Mat::Constant(2, 2, 0.7));

    const TransformFeasibility feasibility =
        check_transform_realizable(mdp, constant, UtilityTransform::logarithmic(), 30, 3);
    REQUIRE(feasibility.outcome == FeasibilityOutcome::Realizable);
    // G1 is constant 1.4, so R2 is the constant (1 - gamma) ln(G1).
    REQUIRE(feasibility.reward.has_value());
    const double expected = (1.0 - 0.5) * std::log(1.4);
    CHECK((feasibility.reward->values().array() - expected).abs().maxCoeff() < 1e-7);
}

TEST_CASE("gamma below one half is processed but flagged") {
    const Momdp momdp = testlab::random_momdp(67, 3, 2, 1, 0.3, 0.3);
    const TransformFeasibility feasibility = check_transform_realizable(
        momdp.mdp(), momdp.rewards()[0], UtilityTransform::affine(1.5, 0.0), 30, 3);
    CHECK(feasibility.outside_regime);
    CHECK(feasibility.outcome == FeasibilityOutcome::Realizable);
}

TEST_CASE("domain violations on probes are reported as DomainError") {
    const Momdp momdp = testlab::random_momdp(71, 3, 2, 1); // rewards straddle zero
    CHECK_THROWS_AS(check_transform_realizable(momdp.mdp(), momdp.rewards()[0],
                                               UtilityTransform::logarithmic(), 30, 3),
                    DomainError);
}

TEST_CASE("monotone scan accepts affine pairs and rejects reversals") {
    const Momdp momdp = testlab::random_momdp(73, 3, 2, 1);
    const RewardTable& r1 = momdp.rewards()[0];
    const double gamma = momdp.mdp().gamma();

    SUBCASE("r2 = 3 r1 + c fits with b = 3") {
        const RewardTable r2(Mat((3.0 * r1.values().array() + 0.4).matrix()));
        const MonotoneScanReport report = monotone_consistency_scan(r1, r2, gamma, 60, 9);
        CHECK(report.violations == 0);
        CHECK(report.fitted_b == doctest::Approx(3.0).epsilon(1e-9));
        CHECK(report.residual < 1e-9);
    }

    SUBCASE("r2 = -r1 reverses the order") {
        const RewardTable r2(Mat(-r1.values()));
        const MonotoneScanReport report = monotone_consistency_scan(r1, r2, gamma, 60, 9);
        CHECK(report.violations > 0);
        CHECK(report.pair_a >= 0);
        CHECK(report.pair_b >= 0);
        // The recorded pair is a genuine reversal.
        const bool reversed = (report.g1_a < report.g1_b && report.g2_a > report.g2_b) ||
                              (report.g1_a > report.g1_b && report.g2_a < report.g2_b);
        CHECK(reversed);
    }

    SUBCASE("random pairs either violate or fit affinely") {
        for (std::uint64_t seed = 0; seed < 8; ++seed) {
            const Momdp pair = testlab::random_momdp(400 + seed, 3, 2, 2);
            const MonotoneScanReport report = monotone_consistency_scan(
                pair.rewards()[0], pair.rewards()[1], pair.mdp().gamma(), 80, seed);
            if (report.violations == 0) CHECK(report.residual < 1e-7);
        }
    }
}

TEST_CASE("feasibility and scan reports serialize") {
    const Momdp bandit = testlab::bandit_momdp();
    const TransformFeasibility feasibility = check_transform_realizable(
        bandit.mdp(), bandit.rewards()[0], UtilityTransform::exponential(1.0), 40, 7);
    const nlohmann::json doc = nlohmann::json::parse(feasibility_to_json(feasibility));
    CHECK(doc.at("outcome").get<std::string>() == "Infeasible");
    CHECK(doc.at("residual").get<double>() > 1e-5);

    const MonotoneScanReport scan = monotone_consistency_scan(
        bandit.rewards()[0], bandit.rewards()[0], 0.5, 30, 2);
    const nlohmann::json scan_doc = nlohmann::json::parse(scan_to_json(scan));
    CHECK(scan_doc.at("violations").get<int>() == 0);
    CHECK(scan_doc.contains("fitted_affine"));
}
