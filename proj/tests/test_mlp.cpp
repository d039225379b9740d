#include <zocr/mlp.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace zocr;

namespace {

NetworkParams random_params(std::array<int, 4> dims, std::uint64_t seed, double scale = 1.0)
{
    NetworkParams p(dims);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, scale);
    for (auto& v : p.flat()) v = n(rng);
    return p;
}

Batch random_batch(int d, int n, int samples, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> cls(0, n - 1);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < samples; ++i) {
        std::vector<double> r(static_cast<std::size_t>(d));
        for (auto& v : r) v = u(rng);
        rows.push_back(r);
        labels.push_back(cls(rng));
    }
    return make_batch(rows, labels, n);
}

// f(theta) = (theta - 3)^2 in one dimension.
struct Quadratic {
    struct Evaluation {
        double value;
    };
    Evaluation evaluate(const Eigen::VectorXd& t) const { return {(t[0] - 3.0) * (t[0] - 3.0)}; }
    static double loss(const Evaluation& e) { return e.value; }
    Eigen::VectorXd gradient(const Eigen::VectorXd& t, const Evaluation&) const
    {
        return Eigen::VectorXd::Constant(1, 2.0 * (t[0] - 3.0));
    }
};
static_assert(Objective<Quadratic>);
static_assert(Objective<MlpObjective>);

} // namespace

TEST(Init, DeterministicPerSeed)
{
    NetworkConfig cfg{5, {7, 4}, 3, 42};
    EXPECT_EQ(init_params(cfg), init_params(cfg));
    NetworkConfig other = cfg;
    other.seed = 43;
    EXPECT_FALSE(init_params(cfg) == init_params(other));
}

TEST(Init, WeightsBoundedByFanInAndBiasesZero)
{
    const auto p = init_params(NetworkConfig{1, {50, 4}, 2, 9});
    // fan-in 1 for the first layer
    for (Eigen::Index i = 0; i < p.weight(0).size(); ++i) {
        EXPECT_GE(p.weight(0).data()[i], -1.0);
        EXPECT_LT(p.weight(0).data()[i], 1.0);
    }
    const double lim2 = 1.0 / std::sqrt(50.0);
    EXPECT_LE(p.weight(1).cwiseAbs().maxCoeff(), lim2);
    for (int l = 0; l < 3; ++l) EXPECT_EQ(p.bias(l).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Init, WeightsCenteredOnZero)
{
    const auto p = init_params(NetworkConfig{100, {100, 100}, 26, 1});
    const auto w = p.weight(0);
    EXPECT_NEAR(w.mean(), 0.0, 0.005); // 10000 draws, sd about 0.0577/sqrt(1e4)
    EXPECT_EQ(p.size(), 100 * 100 + 100 + 100 * 100 + 100 + 26 * 100 + 26);
}

TEST(Logsig, Values)
{
    EXPECT_EQ(logsig(0.0), 0.5);
    for (double x : {0.3, 1.0, 4.5, 20.0}) EXPECT_NEAR(logsig(x) + logsig(-x), 1.0, 1e-15);
    const double tiny = logsig(-1000.0);
    EXPECT_TRUE(std::isfinite(tiny));
    EXPECT_GE(tiny, 0.0);
    EXPECT_LE(tiny, 1e-300);
    EXPECT_EQ(logsig(1000.0), 1.0);
}

TEST(Forward, ZeroParametersGiveOneHalf)
{
    NetworkParams p({4, 3, 3, 5});
    const std::vector<double> x{1, -2, 3, 0.5};
    const auto act = forward(p, x);
    for (double v : act.output()) EXPECT_EQ(v, 0.5);
}

TEST(Forward, ChainOfUnitWeights)
{
    NetworkParams p({1, 1, 1, 1});
    for (int l = 0; l < 3; ++l) p.weight(l)(0, 0) = 1.0;
    const std::vector<double> x{1.0};
    const auto act = forward(p, x);
    EXPECT_NEAR(act.layers[0][0], 0.7310585786300049, 1e-15);
    EXPECT_NEAR(act.layers[1][0], 0.6750375273768237, 1e-15);
    EXPECT_NEAR(act.layers[2][0], 0.6626302265192633, 1e-15);
}

TEST(Forward, WrongInputLengthIsAnError)
{
    NetworkParams p({3, 2, 2, 2});
    const std::vector<double> x{1.0, 2.0};
    try {
        forward(p, x);
        FAIL();
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "input dimension mismatch: network expects 3 features, got 2");
    }
}

TEST(Forward, OutputsStayInUnitInterval)
{
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto p = random_params({6, 5, 4, 3}, s, 3.0);
        std::vector<double> x(6, static_cast<double>(s) - 10.0);
        const auto act = forward(p, x);
        for (double v : act.output()) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(Classify, ArgmaxRules)
{
    EXPECT_EQ(argmax(Eigen::Vector3d(0.1, 0.9, 0.3)), 1);
    EXPECT_EQ(argmax(Eigen::Vector3d(0.5, 0.5, 0.5)), 0);
    EXPECT_EQ(argmax(Eigen::Vector3d(0.2, 0.7, 0.7)), 1);
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n;
    for (int i = 0; i < 100; ++i) {
        Eigen::VectorXd v(8);
        for (auto& x : v) x = n(rng);
        const Eigen::VectorXd w = v.unaryExpr([](double x) { return 3.0 * std::exp(x) + 1.0; });
        EXPECT_EQ(argmax(v), argmax(w));
    }
}

TEST(BatchMse, Examples)
{
    NetworkParams p({2, 2, 2, 2});
    const std::vector<std::vector<double>> rows{{0, 0}, {1, 1}};
    const std::vector<int> labels{0, 1};
    EXPECT_DOUBLE_EQ(batch_mse(p, make_batch(rows, labels, 2)), 0.25);
    const auto soft = make_batch(rows, labels, 2, {0.5, 0.5});
    EXPECT_EQ(batch_mse(p, soft), 0.0);
    EXPECT_THROW(make_batch(std::vector<std::vector<double>>{}, std::vector<int>{}, 2), Error);
    EXPECT_THROW(make_batch(rows, std::vector<int>{0, 2}, 2), Error);
}

TEST(Gradients, MatchCentralDifferences)
{
    const double h = 1e-5;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const std::array<int, 4> dims{4, 5, 3, 3};
        auto p = random_params(dims, s, 0.8);
        const auto b = random_batch(4, 3, 7, s + 100);
        const auto g = gradients(p, b);
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double orig = p.flat()[i];
            p.flat()[i] = orig + h;
            const double up = batch_mse(p, b);
            p.flat()[i] = orig - h;
            const double down = batch_mse(p, b);
            p.flat()[i] = orig;
            const double fd = (up - down) / (2 * h);
            const double an = g.flat()[i];
            EXPECT_LE(std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-8}), 1e-4)
                << "param " << i << " fd " << fd << " analytic " << an;
        }
    }
}

TEST(Gradients, VanishWhenTargetsEqualOutputs)
{
    const auto p = random_params({3, 4, 4, 2}, 8);
    const auto b0 = random_batch(3, 2, 5, 9);
    Batch b = b0;
    for (Eigen::Index j = 0; j < b.size(); ++j) {
        std::vector<double> x(b.inputs.col(j).data(), b.inputs.col(j).data() + 3);
        b.targets.col(j) = forward(p, x).output();
    }
    EXPECT_LT(gradients(p, b).flat().cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Gradients, DuplicatingTheBatchChangesNothing)
{
    const auto p = random_params({3, 4, 4, 2}, 10);
    const auto b = random_batch(3, 2, 6, 11);
    Batch bb{Eigen::MatrixXd(3, 12), Eigen::MatrixXd(2, 12)};
    bb.inputs << b.inputs, b.inputs;
    bb.targets << b.targets, b.targets;
    EXPECT_NEAR(batch_mse(p, bb), batch_mse(p, b), 1e-15);
    EXPECT_LT((gradients(p, bb).flat() - gradients(p, b).flat()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(DecideStep, RejectAndAccept)
{
    const TrainConfig cfg;
    const auto rej = decide_step(1.0, 1.05, 0.1, cfg);
    EXPECT_FALSE(rej.accepted);
    EXPECT_NEAR(rej.lr, 0.07, 1e-15);
    const auto acc = decide_step(1.0, 0.9, 0.1, cfg);
    EXPECT_TRUE(acc.accepted);
    EXPECT_NEAR(acc.lr, 0.105, 1e-15);
    // mild increase within tolerance: accepted, rate unchanged
    const auto flat = decide_step(1.0, 1.03, 0.1, cfg);
    EXPECT_TRUE(flat.accepted);
    EXPECT_EQ(flat.lr, 0.1);
}

TEST(TrainEpoch, QuadraticFirstStep)
{
    TrainConfig cfg;
    cfg.lr0 = 0.1;
    cfg.momentum = 0.0;
    Quadratic q;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(1);
    auto state = start_training(q, theta, cfg);
    EXPECT_EQ(state.initial_mse, 9.0);
    const auto rec = train_epoch(q, theta, state, cfg);
    EXPECT_NEAR(theta[0], 0.6, 1e-15);
    EXPECT_TRUE(rec.accepted);
    EXPECT_NEAR(rec.lr, 0.105, 1e-15);
    EXPECT_NEAR(rec.mse, 5.76, 1e-12);
}

TEST(TrainEpoch, RejectedStepKeepsParametersAndClearsMomentum)
{
    TrainConfig cfg;
    cfg.lr0 = 5.0; // overshoots: theta 0 -> 30, error 729 > 1.04 * 9
    cfg.momentum = 0.0;
    Quadratic q;
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(1);
    auto state = start_training(q, theta, cfg);
    const auto rec = train_epoch(q, theta, state, cfg);
    EXPECT_FALSE(rec.accepted);
    EXPECT_EQ(theta[0], 0.0);
    EXPECT_EQ(rec.mse, 9.0);
    EXPECT_NEAR(rec.lr, 3.5, 1e-15);
    EXPECT_EQ(state.prev_delta[0], 0.0);
}

TEST(Train, GoalAlreadyMetStopsBeforeFirstEpoch)
{
    TrainConfig cfg;
    cfg.goal_mse = 1.0;
    const auto b = random_batch(2, 2, 4, 1);
    const auto r = train(NetworkConfig{2, {3, 3}, 2, 1}, cfg, b);
    EXPECT_EQ(r.stop, StopReason::GoalReached);
    EXPECT_EQ(r.state.epoch, 0u);
    EXPECT_TRUE(r.state.history.empty());
    EXPECT_EQ(r.params, init_params(NetworkConfig{2, {3, 3}, 2, 1}));
}

TEST(Train, LearnsSeparableTwoClassProblem)
{
    const std::vector<std::vector<double>> rows{{0, 0}, {0, 1}, {1, 0}, {1, 1}, {0.1, 0.2}, {0.9, 0.8}};
    const std::vector<int> labels{0, 0, 1, 1, 0, 1};
    const auto b = make_batch(rows, labels, 2);
    TrainConfig cfg;
    cfg.goal_mse = 1e-3;
    cfg.max_epochs = 10'000;
    const NetworkConfig net{2, {4, 4}, 2, 3};
    const auto r = train(net, cfg, b);
    EXPECT_EQ(r.stop, StopReason::GoalReached);
    EXPECT_LE(r.state.current_mse(), 1e-3);
    EXPECT_NEAR(batch_mse(r.params, b), r.state.current_mse(), 1e-15);
    for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(classify(r.params, rows[i]), labels[i]);

    // accept/reject bookkeeping holds on every recorded epoch
    double prev_mse = r.state.initial_mse, prev_lr = cfg.lr0;
    for (const auto& rec : r.state.history) {
        if (rec.accepted) {
            EXPECT_LE(rec.mse, cfg.max_perf_inc * prev_mse);
            EXPECT_NEAR(rec.lr, rec.mse < prev_mse ? prev_lr * cfg.lr_inc : prev_lr, 1e-15 * prev_lr);
        } else {
            EXPECT_EQ(rec.mse, prev_mse);
            EXPECT_NEAR(rec.lr, prev_lr * cfg.lr_dec, 1e-15 * prev_lr);
        }
        prev_mse = rec.mse;
        prev_lr = rec.lr;
    }

    // bit-identical rerun
    const auto again = train(net, cfg, b);
    EXPECT_EQ(again.params, r.params);
    EXPECT_EQ(again.state.mse_history(), r.state.mse_history());
}

TEST(Train, MaxEpochsStopsTheRun)
{
    const auto b = random_batch(3, 3, 10, 2);
    TrainConfig cfg;
    cfg.max_epochs = 25;
    std::size_t seen = 0;
    const auto r = train(NetworkConfig{3, {4, 4}, 3, 1}, cfg, b, [&](const EpochRecord& rec) {
        ++seen;
        EXPECT_EQ(rec.epoch, seen);
    });
    EXPECT_EQ(r.stop, StopReason::MaxEpochs);
    EXPECT_EQ(seen, 25u);
    EXPECT_EQ(r.state.history.size(), 25u);
}

TEST(TrainConfig, RejectsOutOfRangeSettings)
{
    auto bad = [](auto mutate) {
        TrainConfig c;
        mutate(c);
        EXPECT_THROW(c.validate(), Error);
    };
    bad([](TrainConfig& c) { c.momentum = 1.0; });
    bad([](TrainConfig& c) { c.lr_dec = 1.2; });
    bad([](TrainConfig& c) { c.lr_inc = 0.9; });
    bad([](TrainConfig& c) { c.goal_mse = 0.0; });
    bad([](TrainConfig& c) { c.max_perf_inc = 0.5; });
    EXPECT_NO_THROW(TrainConfig{}.validate());
}
