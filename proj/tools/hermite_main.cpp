// Experiment runner: seeded, config-driven training / semi-supervised /
// diagnostics runs with CSV outputs.
//
// Exit codes: 0 success, 2 config error, 3 numeric abort, 4 I/O error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include <CLI11.hpp>

#include "hermite/checkpoint.hpp"
#include "hermite/common.hpp"
#include "hermite/config.hpp"
#include "hermite/data.hpp"
#include "hermite/diagnostics.hpp"
#include "hermite/hermite.hpp"
#include "hermite/kernels.hpp"
#include "hermite/models.hpp"
#include "hermite/rng.hpp"
#include "hermite/saas.hpp"

namespace fs = std::filesystem;
using hermite::cfg::RunConfig;

namespace {

// ---------------------------------------------------------------------------
// shared helpers
// ---------------------------------------------------------------------------

constexpr const char* kSchemaPrefix = "# schema hermitenet.";

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// human-facing summaries use a short fixed format; CSVs keep full precision
std::string fmt_short(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

class CsvFile {
public:
    CsvFile(const fs::path& path, const std::string& schema, const std::string& header,
            const std::string& params = "")
        : out_(path) {
        if (!out_) throw hermite::FormatError(path.string() + ": cannot open for writing", 0);
        out_ << kSchemaPrefix << schema << " v1";
        if (!params.empty()) out_ << " " << params;
        out_ << "\n" << header << "\n";
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

const std::set<std::string> kDatasetKeys = {
    "dataset",          "normalize_mean",      "label_noise",
    "train_subsample",  "moons_train_n",       "moons_test_n",
    "moons_noise",      "blobs_classes",       "blobs_per_class_train",
    "blobs_per_class_test", "blobs_dim",       "blobs_spread",
    "idx_train_images", "idx_train_labels",    "idx_test_images",
    "idx_test_labels",  "digits28_source_images", "digits28_source_labels",
    "digits28_train_n", "digits28_test_n"};

const std::set<std::string> kArchKeys = {"hidden",    "activation", "degree",  "normalize",
                                         "residual",  "stabilizer", "encoder"};

const std::set<std::string> kCommonKeys = {"seed", "seeds", "out", "timing", "parallel"};

std::set<std::string> merge_keys(std::initializer_list<std::set<std::string>> sets) {
    std::set<std::string> out;
    for (const auto& s : sets) out.insert(s.begin(), s.end());
    return out;
}

const std::set<std::string>& all_known_keys();

struct DatasetPair {
    hermite::data::Dataset train;
    hermite::data::Dataset test;
};

DatasetPair build_dataset(RunConfig& config, std::uint64_t seed) {
    using namespace hermite::data;
    const std::string kind = config.get_string("dataset", "two_moons");
    DatasetPair pair;
    if (kind == "two_moons") {
        const int train_n = config.get_int("moons_train_n", 200);
        const int test_n = config.get_int("moons_test_n", 100);
        const double noise = config.get_double("moons_noise", 0.1);
        pair.train = synth_two_moons(train_n, noise, hermite::derive_seed(seed, 0x31));
        pair.test = synth_two_moons(test_n, noise, hermite::derive_seed(seed, 0x32));
    } else if (kind == "blobs") {
        const int k = config.get_int("blobs_classes", 3);
        const int per_train = config.get_int("blobs_per_class_train", 100);
        const int per_test = config.get_int("blobs_per_class_test", 50);
        const int dim = config.get_int("blobs_dim", 2);
        const double spread = config.get_double("blobs_spread", 0.3);
        // train/test share centers through the same generator seed, split by
        // sample count
        Dataset all = synth_blobs(k, per_train + per_test, dim,
                                  spread, hermite::derive_seed(seed, 0x33));
        std::vector<std::size_t> order =
            sample_indices(all.size(), all.size(), hermite::derive_seed(seed, 0x34));
        std::vector<std::size_t> train_idx(order.begin(),
                                           order.begin() + std::size_t(k) * per_train);
        std::vector<std::size_t> test_idx(order.begin() + std::size_t(k) * per_train,
                                          order.end());
        pair.train = subset(all, train_idx);
        pair.test = subset(all, test_idx);
        pair.train.num_classes = pair.test.num_classes = k;
    } else if (kind == "idx") {
        // a missing path is a configuration problem, caught before any compute
        for (const char* key : {"idx_train_images", "idx_train_labels", "idx_test_images",
                                "idx_test_labels"}) {
            const std::string path = config.need_string(key);
            if (!fs::exists(path))
                throw hermite::ConfigError(std::string(key) + ": no such file '" + path + "'");
        }
        pair.train = load_idx(config.need_string("idx_train_images"),
                              config.need_string("idx_train_labels"));
        pair.test = load_idx(config.need_string("idx_test_images"),
                             config.need_string("idx_test_labels"));
    } else if (kind == "digits28") {
        for (const char* key : {"digits28_source_images", "digits28_source_labels"}) {
            const std::string path = config.need_string(key);
            if (!fs::exists(path))
                throw hermite::ConfigError(std::string(key) + ": no such file '" + path + "'");
        }
        Dataset source = load_idx(config.need_string("digits28_source_images"),
                                  config.need_string("digits28_source_labels"));
        const int train_n = config.get_int("digits28_train_n", 5000);
        const int test_n = config.get_int("digits28_test_n", 1000);
        pair.train = make_jittered_images28(source, train_n, hermite::derive_seed(seed, 0x35));
        pair.test = make_jittered_images28(source, test_n, hermite::derive_seed(seed, 0x36));
    } else {
        throw hermite::ConfigError("unknown dataset '" + kind + "'");
    }

    const int subsample = config.get_int("train_subsample", 0);
    if (subsample > 0 && static_cast<std::size_t>(subsample) < pair.train.size()) {
        auto idx = sample_indices(pair.train.size(), subsample, hermite::derive_seed(seed, 0x37));
        pair.train = subset(pair.train, idx);
    }

    const double noise_rate = config.get_double("label_noise", 0.0);
    if (noise_rate > 0.0)
        inject_label_noise(pair.train.labels, pair.train.num_classes, noise_rate,
                           hermite::derive_seed(seed, 0x38));

    if (config.get_bool("normalize_mean", true)) {
        mean_normalize(pair.train);
        mean_normalize(pair.test);
    }
    return pair;
}

hermite::nn::ActivationChoice read_activation(RunConfig& config) {
    hermite::nn::ActivationChoice act;
    act.kind = hermite::nn::act_kind_from_string(config.get_string("activation", "hermite"));
    act.degree = config.get_int("degree", 4);
    if (act.degree < 0) throw hermite::ConfigError("degree must be >= 0");
    if (act.kind == hermite::nn::ActKind::hermite && act.degree == 0)
        throw hermite::ConfigError(
            "degree 0 means softsign only; set activation = softsign_only");
    return act;
}

hermite::nn::MlpSpec read_mlp_spec(RunConfig& config, std::size_t input_dim,
                                   std::size_t output_dim) {
    hermite::nn::MlpSpec spec;
    spec.widths.push_back(input_dim);
    for (std::size_t w : config.get_size_list("hidden", "16,16")) spec.widths.push_back(w);
    spec.widths.push_back(output_dim);
    spec.act = read_activation(config);
    spec.normalize = config.get_bool("normalize", true);
    spec.residual = config.get_bool("residual", false);
    spec.stabilizer = config.get_bool("stabilizer", false);
    return spec;
}

void write_resolved_config(const fs::path& out_dir, const RunConfig& config) {
    std::ofstream out(out_dir / "resolved_config.txt");
    out << config.resolved_text();
}

fs::path prepare_out_dir(const RunConfig& config, const std::string& flag_value) {
    const std::string dir =
        flag_value.empty() ? config.peek_string("out", "runs/out") : flag_value;
    fs::create_directories(dir);
    return dir;
}

bool read_timing(RunConfig& config) {
    const std::string timing = config.get_string("timing", "off");
    if (timing == "off") return false;
    if (timing == "real") return true;
    throw hermite::ConfigError("timing must be 'off' or 'real'");
}

void apply_parallel_switch(RunConfig& config) {
    hermite::kernels::set_parallel_enabled(config.get_bool("parallel", true));
}

std::vector<std::uint64_t> read_seeds(RunConfig& config, std::uint64_t seed_flag,
                                      bool seed_flag_set) {
    if (seed_flag_set) config.set("seed", std::to_string(seed_flag));
    if (config.has("seeds")) return config.get_u64_list("seeds", "1");
    return {config.get_u64("seed", 1)};
}

hermite::ckpt::Checkpoint model_checkpoint(hermite::nn::Model& model,
                                           const std::map<std::string, std::string>& meta) {
    hermite::ckpt::Checkpoint ckpt;
    ckpt.meta = meta;
    for (auto& [name, tensor] : model.named_state()) ckpt.arrays.emplace_back(name, *tensor);
    return ckpt;
}

void load_model_from_checkpoint(hermite::nn::Model& model,
                                const hermite::ckpt::Checkpoint& ckpt) {
    for (auto& [name, tensor] : model.named_state()) {
        const hermite::Tensor* stored = ckpt.find(name);
        if (!stored)
            throw std::invalid_argument("checkpoint is missing array '" + name + "'");
        if (stored->shape() != tensor->shape())
            throw std::invalid_argument("checkpoint array '" + name + "' has shape " +
                                        stored->shape_string() + ", model expects " +
                                        tensor->shape_string());
        *tensor = *stored;
    }
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainFlags {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 1;
};

const std::set<std::string> kTrainKeys = merge_keys(
    {kCommonKeys, kDatasetKeys, kArchKeys,
     {"epochs", "batch", "optimizer", "lr", "momentum", "beta1", "beta2", "eps_adam",
      "objective"}});

int run_single_train(RunConfig config, std::uint64_t seed, const fs::path& out_dir,
                     bool multi_seed) {
    const bool timing = read_timing(config);
    DatasetPair ds = build_dataset(config, seed);

    const std::string objective_name = config.get_string("objective", "classify");
    hermite::nn::TrainOptions options;
    options.epochs = config.get_int("epochs", 50);
    options.batch = static_cast<std::size_t>(config.get_int("batch", 64));
    options.seed = seed;
    options.measure_time = timing;
    options.optimizer.kind =
        hermite::opt::kind_from_string(config.get_string("optimizer", "sgd"));
    options.optimizer.lr = config.get_double("lr", 0.1);
    options.optimizer.momentum = config.get_double("momentum", 0.9);
    options.optimizer.beta1 = config.get_double("beta1", 0.9);
    options.optimizer.beta2 = config.get_double("beta2", 0.999);
    options.optimizer.eps = config.get_double("eps_adam", 1e-8);

    hermite::nn::Model model;
    std::map<std::string, std::string> meta;
    if (objective_name == "classify") {
        options.objective = hermite::nn::Objective::classify;
        auto spec = read_mlp_spec(config, ds.train.dim(),
                                  static_cast<std::size_t>(ds.train.num_classes));
        model = hermite::nn::build_mlp(spec);
        meta["arch"] = spec.tag();
    } else if (objective_name == "autoencode") {
        options.objective = hermite::nn::Objective::reconstruct;
        hermite::nn::AutoencoderSpec spec;
        spec.encoder_widths.push_back(ds.train.dim());
        for (std::size_t w : config.get_size_list("encoder", "64,16"))
            spec.encoder_widths.push_back(w);
        spec.act = read_activation(config);
        spec.normalize = config.get_bool("normalize", false);
        spec.stabilizer = config.get_bool("stabilizer", false);
        model = hermite::nn::build_autoencoder(spec);
        meta["arch"] = spec.tag();
    } else {
        throw hermite::ConfigError("objective must be 'classify' or 'autoencode'");
    }

    auto result = hermite::nn::train_supervised(model, ds.train, ds.test, options);

    const std::string suffix = multi_seed ? "_seed" + std::to_string(seed) : "";
    CsvFile csv(out_dir / ("metrics" + suffix + ".csv"), "train_metrics",
                "epoch,train_loss,train_acc,test_loss,test_acc,seconds");
    for (const auto& row : result.rows)
        csv.row({std::to_string(row.epoch), fmt(row.train_loss), fmt(row.train_acc),
                 fmt(row.test_loss), fmt(row.test_acc), fmt(row.seconds)});

    meta["seed"] = std::to_string(seed);
    meta["objective"] = objective_name;
    hermite::ckpt::save((out_dir / ("model" + suffix + ".ckpt")).string(),
                        model_checkpoint(model, meta));
    {
        std::ofstream resolved(out_dir / ("resolved_config" + suffix + ".txt"));
        resolved << config.resolved_text();
    }

    if (result.aborted) {
        std::cerr << "train: numeric abort at epoch " << result.abort_epoch << ": "
                  << result.abort_reason << "\n";
        return 3;
    }
    return 0;
}

int cmd_train(const TrainFlags& flags) {
    RunConfig config = flags.config_path.empty() ? RunConfig()
                                                 : RunConfig::from_file(flags.config_path);
    config.require_known(all_known_keys());
    config.apply_env_overrides(all_known_keys());
    apply_parallel_switch(config);
    const fs::path out_dir = prepare_out_dir(config, flags.out_dir);
    const auto seeds = read_seeds(config, flags.seed, flags.seed_set);

    int status = 0;
    std::mutex status_mu;
    std::exception_ptr first_error;
    const int jobs = std::max(1, flags.jobs);
    std::size_t next = 0;
    while (next < seeds.size()) {
        const std::size_t wave = std::min<std::size_t>(jobs, seeds.size() - next);
        std::vector<std::thread> threads;
        for (std::size_t t = 0; t < wave; ++t) {
            const std::uint64_t seed = seeds[next + t];
            threads.emplace_back([&, seed]() {
                try {
                    const int rc = run_single_train(config, seed, out_dir, seeds.size() > 1);
                    std::lock_guard<std::mutex> lock(status_mu);
                    status = std::max(status, rc);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(status_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            });
        }
        for (auto& th : threads) th.join();
        if (first_error) std::rethrow_exception(first_error);
        next += wave;
    }
    return status;
}

// ---------------------------------------------------------------------------
// saas
// ---------------------------------------------------------------------------

struct SaasFlags {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool compare_relu = false;
};

const std::set<std::string> kSaasKeys = merge_keys(
    {kCommonKeys, kDatasetKeys, kArchKeys,
     {"mi", "mo", "eta_w", "eta_p_primal", "eta_p_dual", "lambda_entropy", "saas_batch",
      "n_labeled", "pl_threshold", "hard_targets", "cost_dollars_per_hour",
      "cost_seconds_per_epoch"}});

struct SaasArmOutcome {
    std::string name;
    hermite::saas::SaasResult result;
};

int cmd_saas(const SaasFlags& flags) {
    RunConfig config = flags.config_path.empty() ? RunConfig()
                                                 : RunConfig::from_file(flags.config_path);
    config.require_known(all_known_keys());
    config.apply_env_overrides(all_known_keys());
    apply_parallel_switch(config);
    const fs::path out_dir = prepare_out_dir(config, flags.out_dir);
    if (flags.seed_set) config.set("seed", std::to_string(flags.seed));

    hermite::saas::SaasConfig saas_config;
    saas_config.seed = config.get_u64("seed", 1);
    saas_config.inner_epochs = config.get_int("mi", 5);
    saas_config.outer_epochs = config.get_int("mo", 30);
    saas_config.eta_w = config.get_double("eta_w", 0.1);
    saas_config.eta_p_primal = config.get_double("eta_p_primal", 1.0);
    saas_config.eta_p_dual = config.get_double("eta_p_dual", 1.0);
    saas_config.lambda_entropy = config.get_double("lambda_entropy", 0.1);
    saas_config.batch = static_cast<std::size_t>(config.get_int("saas_batch", 64));
    saas_config.hard_targets = config.get_bool("hard_targets", false);
    saas_config.measure_time = read_timing(config);

    DatasetPair ds = build_dataset(config, saas_config.seed);
    const std::size_t n_labeled =
        static_cast<std::size_t>(config.get_int("n_labeled", 50));
    auto split = hermite::data::make_ssl_split(ds.train, n_labeled,
                                               hermite::derive_seed(saas_config.seed, 0x39));
    auto labeled = hermite::data::subset(ds.train, split.labeled);
    auto unlabeled = hermite::data::subset(ds.train, split.unlabeled);

    const double threshold = config.get_double("pl_threshold", 0.85);
    const double dollars_per_hour = config.get_double("cost_dollars_per_hour", 0.0);
    const double seconds_per_epoch = config.get_double("cost_seconds_per_epoch", 0.0);

    auto spec = read_mlp_spec(config, ds.train.dim(),
                              static_cast<std::size_t>(ds.train.num_classes));

    std::vector<SaasArmOutcome> arms;
    {
        SaasArmOutcome arm;
        arm.name = spec.act.kind == hermite::nn::ActKind::hermite ? "H" : "R";
        arm.result = hermite::saas::saas_train(labeled, unlabeled, spec, saas_config);
        arms.push_back(std::move(arm));
    }
    if (flags.compare_relu) {
        auto relu_spec = spec;
        relu_spec.act.kind = hermite::nn::ActKind::relu;
        SaasArmOutcome arm;
        arm.name = "R";
        arm.result = hermite::saas::saas_train(labeled, unlabeled, relu_spec, saas_config);
        arms.push_back(std::move(arm));
    }

    for (const auto& arm : arms) {
        const std::string file =
            arm.name == "H" ? "saas_hermite.csv" : "saas_relu.csv";
        CsvFile csv(out_dir / file, "saas_metrics",
                    "outer_epoch,pl_accuracy,mean_inner_loss_first,mean_inner_loss_last,"
                    "seconds");
        for (const auto& row : arm.result.rows)
            csv.row({std::to_string(row.outer_epoch), fmt(row.pl_accuracy),
                     fmt(row.mean_inner_loss_first), fmt(row.mean_inner_loss_last),
                     fmt(row.seconds)});
    }

    // final posterior of the first arm
    {
        const hermite::Tensor& p = arms.front().result.pseudo_labels;
        std::string header = "row";
        for (std::size_t j = 0; j < p.cols(); ++j) header += ",p_" + std::to_string(j);
        CsvFile csv(out_dir / "pseudo_labels.csv", "pseudo_labels", header);
        for (std::size_t i = 0; i < p.rows(); ++i) {
            std::vector<std::string> cells{std::to_string(i)};
            for (std::size_t j = 0; j < p.cols(); ++j) cells.push_back(fmt(p.at(i, j)));
            csv.row(cells);
        }
    }

    std::ofstream summary(out_dir / "summary.txt");
    summary << "arm,max_pl_accuracy,epochs_to_threshold(" << fmt_short(threshold)
            << "),hours,dollars\n";
    bool any_abort = false;
    for (const auto& arm : arms) {
        any_abort = any_abort || arm.result.aborted;
        const auto log = arm.result.accuracy_log();
        std::string epochs_cell = "none";
        double epochs_for_cost = static_cast<double>(saas_config.outer_epochs);
        if (!log.empty()) {
            if (auto epoch = hermite::saas::epochs_to_accuracy(log, threshold)) {
                epochs_cell = std::to_string(*epoch);
                epochs_for_cost = static_cast<double>(*epoch + 1);
            }
        }
        std::string hours = "-", dollars = "-";
        double sec = seconds_per_epoch;
        if (sec <= 0.0 && saas_config.measure_time && !arm.result.rows.empty()) {
            double total = 0.0;
            for (const auto& row : arm.result.rows) total += row.seconds;
            sec = total / static_cast<double>(arm.result.rows.size());
        }
        if (sec > 0.0 && dollars_per_hour > 0.0 && epochs_for_cost > 0.0) {
            const auto cost =
                hermite::saas::cost_model(epochs_for_cost, sec, dollars_per_hour);
            hours = fmt_short(cost.hours);
            dollars = fmt_short(cost.dollars);
        }
        summary << arm.name << "," << fmt_short(arm.result.max_pl_accuracy()) << ","
                << epochs_cell << "," << hours << "," << dollars << "\n";
        std::cout << "arm " << arm.name << ": max pseudo-label accuracy "
                  << fmt_short(arm.result.max_pl_accuracy()) << ", epochs to "
                  << fmt_short(threshold) << ": " << epochs_cell << "\n";
    }
    write_resolved_config(out_dir, config);
    if (any_abort) {
        for (const auto& arm : arms)
            if (arm.result.aborted)
                std::cerr << "saas arm " << arm.name << ": numeric abort at outer epoch "
                          << arm.result.abort_epoch << ": " << arm.result.abort_reason << "\n";
        return 3;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// diagnose
// ---------------------------------------------------------------------------

struct DiagnoseFlags {
    std::string config_path;
    std::string out_dir;
    std::string checkpoint;
    std::string probes;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

const std::set<std::string> kDiagnoseKeys = merge_keys(
    {kCommonKeys, kDatasetKeys, kArchKeys,
     {"checkpoint", "probes", "eta_grid", "radii", "census_tau", "directions", "traj_steps",
      "traj_lr", "traj_batch", "probe_batch", "theorem1_alpha", "theorem1_epsilons",
      "lemma1_trials", "lemma1_p"}});

int cmd_diagnose(const DiagnoseFlags& flags) {
    RunConfig config = flags.config_path.empty() ? RunConfig()
                                                 : RunConfig::from_file(flags.config_path);
    config.require_known(all_known_keys());
    config.apply_env_overrides(all_known_keys());
    apply_parallel_switch(config);
    const fs::path out_dir = prepare_out_dir(config, flags.out_dir);
    if (flags.seed_set) config.set("seed", std::to_string(flags.seed));
    const std::uint64_t seed = config.get_u64("seed", 1);

    const std::string ckpt_path = !flags.checkpoint.empty()
                                      ? flags.checkpoint
                                      : config.get_string("checkpoint", "");
    DatasetPair ds = build_dataset(config, seed);
    auto spec = read_mlp_spec(config, ds.train.dim(),
                              static_cast<std::size_t>(ds.train.num_classes));
    hermite::nn::Model model = hermite::nn::build_mlp(spec);
    model.reinit(seed);
    if (!ckpt_path.empty())
        load_model_from_checkpoint(model, hermite::ckpt::load(ckpt_path));

    std::string probe_list = !flags.probes.empty()
                                 ? flags.probes
                                 : config.get_string("probes", "landscape,active_units");
    std::set<std::string> probes;
    {
        std::string cur;
        for (char c : probe_list + ",") {
            if (c == ',') {
                if (!cur.empty()) probes.insert(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
    }

    const std::size_t probe_batch =
        static_cast<std::size_t>(config.get_int("probe_batch", 128));

    for (const auto& probe : probes) {
        if (probe == "landscape") {
            const auto grid = config.get_double_list(
                "eta_grid", "0,0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5");
            const std::size_t take = std::min(probe_batch, ds.train.size());
            auto idx = hermite::data::sample_indices(ds.train.size(), take,
                                                     hermite::derive_seed(seed, 0x40));
            auto part = hermite::data::subset(ds.train, idx);
            auto result = hermite::diag::loss_along_gradient(
                model, part.features, hermite::nn::one_hot(part.labels, ds.train.num_classes),
                grid);
            CsvFile csv(out_dir / "diag_landscape.csv", "diag_landscape", "eta,loss",
                        "batch=" + std::to_string(take));
            for (std::size_t i = 0; i < grid.size(); ++i)
                csv.row({fmt(result.eta_grid[i]), fmt(result.losses[i])});
        } else if (probe == "beta" || probe == "deviation") {
            const int steps = config.get_int("traj_steps", 50);
            const double lr = config.get_double("traj_lr", 0.1);
            const std::size_t batch =
                static_cast<std::size_t>(config.get_int("traj_batch", 64));
            auto traj = hermite::diag::record_sgd_trajectory(model, ds.train, steps, lr, batch,
                                                             seed);
            if (probe == "beta") {
                const double beta = hermite::diag::max_beta_smoothness(traj.weights, traj.grads);
                CsvFile csv(out_dir / "diag_beta.csv", "diag_beta", "max_beta_smoothness",
                            "steps=" + std::to_string(steps) + " lr=" + fmt_short(lr) +
                                " batch=" + std::to_string(batch));
                csv.row({fmt(beta)});
            } else {
                auto dev = hermite::diag::weight_deviation(traj.weights);
                CsvFile csv(out_dir / "diag_deviation.csv", "diag_deviation",
                            "step,weight_deviation",
                            "steps=" + std::to_string(steps) + " lr=" + fmt_short(lr) +
                                " batch=" + std::to_string(batch));
                for (std::size_t i = 0; i < dev.size(); ++i)
                    csv.row({std::to_string(i), fmt(dev[i])});
            }
        } else if (probe == "active_units") {
            const double tau = config.get_double("census_tau", 0.0);
            auto fractions = hermite::diag::active_unit_census(model, ds.train.features, tau);
            CsvFile csv(out_dir / "diag_active_units.csv", "diag_active_units",
                        "layer,active_fraction", "tau=" + fmt_short(tau));
            for (std::size_t i = 0; i < fractions.size(); ++i)
                csv.row({std::to_string(i), fmt(fractions[i])});
        } else if (probe == "confidence") {
            const auto radii = config.get_double_list("radii", "1,2,5,10,20,50");
            const int directions = config.get_int("directions", 20);
            hermite::Rng rng(hermite::derive_seed(seed, 0x41));
            CsvFile csv(out_dir / "diag_confidence.csv", "diag_confidence",
                        "direction,radius,max_softmax",
                        "directions=" + std::to_string(directions));
            for (int d = 0; d < directions; ++d) {
                std::vector<double> direction(ds.train.dim());
                double norm = 0.0;
                for (auto& v : direction) {
                    v = rng.gaussian();
                    norm += v * v;
                }
                norm = std::sqrt(norm);
                for (auto& v : direction) v /= norm;
                auto conf = hermite::diag::confidence_profile(model, direction, radii);
                for (std::size_t r = 0; r < radii.size(); ++r)
                    csv.row({std::to_string(d), fmt(radii[r]), fmt(conf[r])});
            }
        } else if (probe == "theorem1") {
            const double alpha = config.get_double("theorem1_alpha", 0.0);
            const auto epsilons =
                config.get_double_list("theorem1_epsilons", "0.01,0.05,0.1,0.2");
            // alpha and ||w_J|| from the model head/first layer unless given
            auto state = model.named_state();
            const hermite::Tensor* first_w = nullptr;
            const hermite::Tensor* last_w = nullptr;
            for (auto& [name, tensor] : state) {
                if (name.size() >= 2 && name.substr(name.size() - 2) == ".W") {
                    if (!first_w) first_w = tensor;
                    last_w = tensor;
                }
            }
            if (!first_w || !last_w || first_w == last_w)
                throw std::invalid_argument(
                    "theorem1 probe: model needs at least two dense layers");
            double w_norm = 0.0;
            for (std::size_t j = 0; j < first_w->cols(); ++j) {
                double s = 0.0;
                for (std::size_t i = 0; i < first_w->rows(); ++i)
                    s += first_w->at(i, j) * first_w->at(i, j);
                w_norm = std::max(w_norm, std::sqrt(s));
            }
            double alpha_used = alpha;
            if (alpha_used <= 0.0) {
                // alpha = max_{l,k} sum_j |a_lj - a_kj| over the head weights
                const std::size_t k = last_w->cols(), j_count = last_w->rows();
                for (std::size_t l = 0; l < k; ++l)
                    for (std::size_t m = 0; m < k; ++m) {
                        double s = 0.0;
                        for (std::size_t j = 0; j < j_count; ++j)
                            s += std::abs(last_w->at(j, l) - last_w->at(j, m));
                        alpha_used = std::max(alpha_used, s);
                    }
            }
            CsvFile csv(out_dir / "diag_theorem1.csv", "diag_theorem1",
                        "epsilon,alpha,w_norm,required_norm,vacuous",
                        "classes=" + std::to_string(ds.train.num_classes));
            for (double eps : epsilons) {
                auto res = hermite::diag::theorem1_required_norm(w_norm, alpha_used,
                                                                 ds.train.num_classes, eps);
                csv.row({fmt(eps), fmt(alpha_used), fmt(w_norm), fmt(res.required_norm),
                         res.vacuous ? "1" : "0"});
            }
        } else if (probe == "lemma1") {
            const int trials = config.get_int("lemma1_trials", 100);
            const double p = [&]() {
                const std::string raw = config.get_string("lemma1_p", "2");
                if (raw == "inf") return std::numeric_limits<double>::infinity();
                return std::stod(raw);
            }();
            hermite::Rng rng(hermite::derive_seed(seed, 0x42));
            const int degree = spec.act.kind == hermite::nn::ActKind::hermite
                                   ? spec.act.degree
                                   : 4;
            CsvFile csv(out_dir / "diag_lemma1.csv", "diag_lemma1",
                        "trial,bound,exact_gap,alpha,beta",
                        "trials=" + std::to_string(trials) + " degree=" +
                            std::to_string(degree) + " p=" + config.get_string("lemma1_p", "2"));
            for (int t = 0; t < trials; ++t) {
                hermite::diag::BoundInputs inputs;
                inputs.output_weights = hermite::Tensor({3, 4});
                inputs.hidden_weights = hermite::Tensor({4, 2});
                for (std::size_t i = 0; i < inputs.output_weights.numel(); ++i)
                    inputs.output_weights[i] = rng.gaussian();
                for (std::size_t i = 0; i < inputs.hidden_weights.numel(); ++i)
                    inputs.hidden_weights[i] = rng.gaussian();
                inputs.coeffs.resize(degree + 1);
                for (auto& c : inputs.coeffs) c = rng.gaussian();
                inputs.p_norm = p;
                std::vector<double> x(2);
                for (auto& v : x) v = rng.gaussian();
                auto res = hermite::diag::lemma1_bound(inputs, x);
                csv.row({std::to_string(t), fmt(res.bound), fmt(res.lhs_max), fmt(res.alpha),
                         fmt(res.beta)});
            }
        } else {
            throw hermite::ConfigError("unknown probe '" + probe + "'");
        }
    }
    write_resolved_config(out_dir, config);
    return 0;
}

// ---------------------------------------------------------------------------
// coeffs
// ---------------------------------------------------------------------------

struct CoeffsFlags {
    std::string config_path;
    std::string out_dir;
    int degree = 4;
};

const std::set<std::string> kCoeffsKeys = merge_keys({kCommonKeys, {"degree"}});

// One flat config vocabulary serves every subcommand, so a single file can
// drive a train run and the later diagnose pass on its checkpoint. Each run
// resolves (and dumps) only the keys it actually reads.
const std::set<std::string>& all_known_keys() {
    static const std::set<std::string> keys =
        merge_keys({kTrainKeys, kSaasKeys, kDiagnoseKeys, kCoeffsKeys});
    return keys;
}

int cmd_coeffs(const CoeffsFlags& flags) {
    RunConfig config = flags.config_path.empty() ? RunConfig()
                                                 : RunConfig::from_file(flags.config_path);
    config.require_known(all_known_keys());
    config.apply_env_overrides(all_known_keys());
    const fs::path out_dir = prepare_out_dir(config, flags.out_dir);
    const int degree = flags.degree >= 0 ? flags.degree : config.get_int("degree", 4);
    if (degree < 0) throw hermite::ConfigError("degree must be >= 0");

    const auto quad =
        hermite::basis::GaussianQuadrature::make(std::max(64, 2 * degree + 8));
    const auto coeffs = hermite::basis::relu_expansion_coefficients(degree, quad);

    CsvFile csv(out_dir / "coeffs.csv", "relu_expansion", "i,c_i,residual_l2");
    std::printf("  i  c_i                     residual ||ReLU - sigma_i||\n");
    for (int i = 0; i <= degree; ++i) {
        const std::vector<double> truncated(coeffs.begin(), coeffs.begin() + i + 1);
        const double residual = std::sqrt(hermite::basis::relu_l2_residual(truncated));
        csv.row({std::to_string(i), fmt(coeffs[i]), fmt(residual)});
        std::printf("%3d  %- 22.10g  %.10g\n", i, coeffs[i], residual);
    }
    write_resolved_config(out_dir, config);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hermite-expansion activation experiments"};
    app.require_subcommand(1);

    TrainFlags train_flags;
    auto* train = app.add_subcommand("train", "supervised training run");
    train->add_option("--config", train_flags.config_path, "config file path");
    train->add_option("--out", train_flags.out_dir, "output directory");
    auto* train_seed = train->add_option("--seed", train_flags.seed, "seed override");
    train->add_option("--jobs", train_flags.jobs, "parallel independent seeds");

    SaasFlags saas_flags;
    auto* saas = app.add_subcommand("saas", "two-loop pseudo-label run");
    saas->add_option("--config", saas_flags.config_path, "config file path");
    saas->add_option("--out", saas_flags.out_dir, "output directory");
    auto* saas_seed = saas->add_option("--seed", saas_flags.seed, "seed override");
    saas->add_flag("--compare-relu", saas_flags.compare_relu,
                   "run a relu arm with the shared seed");

    DiagnoseFlags diag_flags;
    auto* diagnose = app.add_subcommand("diagnose", "landscape/robustness probes");
    diagnose->add_option("--config", diag_flags.config_path, "config file path");
    diagnose->add_option("--out", diag_flags.out_dir, "output directory");
    diagnose->add_option("--checkpoint", diag_flags.checkpoint, "checkpoint path");
    diagnose->add_option("--probe", diag_flags.probes, "comma-separated probe names");
    auto* diag_seed = diagnose->add_option("--seed", diag_flags.seed, "seed override");

    CoeffsFlags coeffs_flags;
    auto* coeffs = app.add_subcommand("coeffs", "ReLU expansion coefficients");
    coeffs->add_option("--config", coeffs_flags.config_path, "config file path");
    coeffs->add_option("--out", coeffs_flags.out_dir, "output directory");
    coeffs->add_option("--degree", coeffs_flags.degree, "max polynomial index");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (train->parsed()) {
            train_flags.seed_set = train_seed->count() > 0;
            return cmd_train(train_flags);
        }
        if (saas->parsed()) {
            saas_flags.seed_set = saas_seed->count() > 0;
            return cmd_saas(saas_flags);
        }
        if (diagnose->parsed()) {
            diag_flags.seed_set = diag_seed->count() > 0;
            return cmd_diagnose(diag_flags);
        }
        if (coeffs->parsed()) return cmd_coeffs(coeffs_flags);
    } catch (const hermite::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const hermite::NumericError& e) {
        std::cerr << "numeric abort: " << e.what() << "\n";
        return 3;
    } catch (const hermite::FormatError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
