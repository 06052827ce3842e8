// Command-line front end: experiments, single-model fitting/detection, the
// synthetic walkthrough, and the partition/estimate reports.
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pegasus/dataset.hpp"
#include "pegasus/detectors/common.hpp"
#include "pegasus/detectors/elliptic.hpp"
#include "pegasus/detectors/iforest.hpp"
#include "pegasus/detectors/knn.hpp"
#include "pegasus/detectors/lof.hpp"
#include "pegasus/detectors/ocsvm.hpp"
#include "pegasus/errors.hpp"
#include "pegasus/experiment.hpp"
#include "pegasus/framework.hpp"
#include "pegasus/kernels.hpp"
#include "pegasus/manifold.hpp"
#include "pegasus/text.hpp"
#include "pegasus/version.hpp"

namespace {

using namespace pegasus;

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.good()) throw IoError("short write to '" + path + "'");
}

void emit_json(const nlohmann::json& j, const std::string& out_path) {
    const std::string text = j.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
    } else {
        write_text(out_path, text);
    }
}

// Shared source options: an explicit sample CSV, or an MNIST draw.
struct SampleOpts {
    std::string input_csv;
    std::string mnist_dir;
    std::string split = "test";
    int bulk_class = 1;
    std::string anomalies;
    std::uint64_t seed = 7;
    double max_fraction = 0.10;

    void attach(CLI::App* cmd) {
        cmd->add_option("--input", input_csv, "sample CSV (index,is_anomaly,class,f0..)");
        cmd->add_option("--mnist-dir", mnist_dir,
                        "MNIST directory (default: $PEGASUS_DATA_DIR or ./data/mnist)");
        cmd->add_option("--split", split, "train|test")->capture_default_str();
        cmd->add_option("--bulk", bulk_class, "bulk class")->capture_default_str();
        cmd->add_option("--anomalies", anomalies, "class:count list, e.g. 7:120,8:120");
        cmd->add_option("--sample-seed", seed, "sampling seed")->capture_default_str();
        cmd->add_option("--max-anomaly-fraction", max_fraction,
                        "refuse samples more contaminated than this")
            ->capture_default_str();
    }

    data::ContaminatedSample load() const {
        if (!input_csv.empty()) return data::load_sample_csv(input_csv);
        if (anomalies.empty())
            throw InvalidConfig("provide --input, or --anomalies to draw from MNIST");
        const auto specs = exp::parse_anomaly_specs(anomalies);
        const auto ds = data::load_mnist_split(data::resolve_data_dir(mnist_dir), split);
        return data::build_contaminated_sample(ds, bulk_class, specs, seed, max_fraction);
    }
};

std::uint64_t sidecar_hash(const std::string& flags_path) {
    const std::string meta_path = flags_path + ".meta.json";
    std::ifstream in(meta_path, std::ios::binary);
    if (!in) return 0;
    nlohmann::json meta;
    in >> meta;
    return meta.value("dataset_hash", std::uint64_t{0});
}

int run_cli(int argc, char** argv) {
    CLI::App app{"manifold-based anomaly detection"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    // ---- run ----
    auto* run = app.add_subcommand("run", "run a config-driven experiment");
    std::string run_config;
    int run_threads = -1;
    std::string run_out;
    run->add_option("--config", run_config, "experiment config file")->required();
    run->add_option("--threads", run_threads, "override kernel thread count");
    run->add_option("--out", run_out, "override output directory");
    run->callback([&] {
        exp::ExperimentConfig config = exp::load_experiment_config(run_config);
        if (run_threads >= 0) config.threads = run_threads;
        if (!run_out.empty()) config.output_dir = run_out;
        const exp::ExperimentResult result = exp::run_experiment(config);
        std::cout << exp::report_markdown(result);
    });

    // ---- pegasus-demo ----
    auto* demo = app.add_subcommand("pegasus-demo", "synthetic horse-dataset walkthrough");
    std::uint64_t demo_seed = 42;
    std::size_t demo_n = 10000;
    std::size_t demo_lof_k = 20;
    std::string demo_out;
    demo->add_option("--seed", demo_seed, "generator seed")->capture_default_str();
    demo->add_option("--n-normal", demo_n, "bulk size")->capture_default_str();
    demo->add_option("--lof-k", demo_lof_k, "LOF neighborhood size")->capture_default_str();
    demo->add_option("--out", demo_out, "directory for demo.md / demo.json");
    demo->callback([&] {
        data::PegasusConfig config = data::default_pegasus_config();
        config.n_normal = demo_n;
        const auto result = exp::run_pegasus_demo(config, demo_seed, detect::LofParams{demo_lof_k});
        const std::string md = exp::pegasus_demo_markdown(result);
        std::cout << md;
        if (!demo_out.empty()) {
            std::filesystem::create_directories(demo_out);
            write_text(demo_out + "/demo.md", md);
            write_text(demo_out + "/demo.json", exp::pegasus_demo_json(result).dump(2) + "\n");
        }
    });

    // ---- cod-demo ----
    auto* cod = app.add_subcommand("cod-demo", "concentration-of-distances demonstration");
    std::size_t cod_dim = 0;
    std::size_t cod_pairs = 100000;
    std::uint64_t cod_seed = 1;
    std::string cod_out;
    cod->add_option("--dim", cod_dim, "ambient dimension")->required();
    cod->add_option("--pairs", cod_pairs, "number of point pairs")->capture_default_str();
    cod->add_option("--seed", cod_seed, "rng seed")->capture_default_str();
    cod->add_option("--out", cod_out, "write the JSON report here instead of stdout");
    cod->callback([&] {
        const CodReport rep = curse_of_dim_demo(cod_dim, cod_pairs, cod_seed);
        emit_json(rep, cod_out);
    });

    // ---- fit-manifold ----
    auto* fit = app.add_subcommand("fit-manifold", "fit a PCA or autoencoder manifold");
    SampleOpts fit_sample;
    fit_sample.attach(fit);
    std::string fit_method = "pca";
    long long fit_latent = -1;
    double fit_variance = -1.0;
    std::uint64_t fit_seed = 1;
    std::string fit_out;
    manifold::AeTrainConfig fit_ae;
    fit->add_option("--method", fit_method, "pca|ae")->capture_default_str();
    fit->add_option("--latent", fit_latent, "latent dimension");
    fit->add_option("--variance", fit_variance, "PCA explained-variance target in (0,1]");
    fit->add_option("--seed", fit_seed, "AE init/shuffle seed")->capture_default_str();
    fit->add_option("--hidden", fit_ae.hidden, "AE hidden width")->capture_default_str();
    fit->add_option("--epochs", fit_ae.epochs, "AE training epochs")->capture_default_str();
    fit->add_option("--batch", fit_ae.batch_size, "AE minibatch size")->capture_default_str();
    fit->add_option("--lr", fit_ae.learning_rate, "AE learning rate")->capture_default_str();
    fit->add_option("--momentum", fit_ae.momentum, "AE SGD momentum")->capture_default_str();
    fit->add_option("--out", fit_out, "model file to write")->required();
    fit->callback([&] {
        const data::ContaminatedSample sample = fit_sample.load();
        manifold::ManifoldModel model;
        if (fit_method == "pca") {
            if ((fit_latent >= 0) == (fit_variance >= 0.0))
                throw InvalidConfig("pca needs exactly one of --latent / --variance");
            const auto target = fit_latent >= 0
                                    ? manifold::PcaTarget::latent(static_cast<std::size_t>(fit_latent))
                                    : manifold::PcaTarget::variance(fit_variance);
            model = manifold::fit_pca_manifold(sample.X, target);
        } else if (fit_method == "ae") {
            if (fit_latent < 1) throw InvalidConfig("ae needs --latent >= 1");
            fit_ae.latent = static_cast<std::size_t>(fit_latent);
            fit_ae.seed = fit_seed;
            model = manifold::fit_ae_manifold(sample.X, fit_ae);
        } else {
            throw InvalidConfig("--method must be pca or ae, got '" + fit_method + "'");
        }
        manifold::save_model(fit_out, model);
        std::cout << "method=" << model.method() << " latent_dim=" << model.latent_dim()
                  << " input_dim=" << model.input_dim()
                  << " fit_metric=" << format_double(model.fit_metric) << "\n";
    });

    // ---- detect ----
    auto* det = app.add_subcommand("detect", "score a sample and flag the top k");
    SampleOpts det_sample;
    det_sample.attach(det);
    std::string det_method;
    std::string det_model;
    std::size_t det_k = 0;
    std::string det_out;
    std::string det_scores_out;
    std::uint64_t det_seed = 1;
    detect::LofParams det_lof;
    detect::KnnParams det_knn;
    detect::IForestParams det_if;
    detect::EeParams det_ee;
    detect::OcsvmParams det_svm;
    det->add_option("--method", det_method, "re|lof|iforest|ee|ocsvm|knn")->required();
    det->add_option("--model", det_model,
                    "manifold model file; detectors run on its embedding (omit to run on raw "
                    "features; required for re)");
    det->add_option("--k", det_k, "flag budget; 0 = number of true anomalies")
        ->capture_default_str();
    det->add_option("--seed", det_seed, "detector seed (iforest/ee)")->capture_default_str();
    det->add_option("--lof-k", det_lof.k_neighbors, "LOF neighbors")->capture_default_str();
    det->add_option("--knn-k", det_knn.k_neighbors, "kNN neighbors")->capture_default_str();
    det->add_option("--trees", det_if.n_trees, "isolation trees")->capture_default_str();
    det->add_option("--subsample", det_if.subsample_size, "per-tree subsample")
        ->capture_default_str();
    det->add_option("--support-fraction", det_ee.support_fraction, "MCD h/n; <0 = default")
        ->capture_default_str();
    det->add_option("--subsets", det_ee.n_initial_subsets, "MCD initial subsets")
        ->capture_default_str();
    det->add_option("--nu", det_svm.nu, "OCSVM nu")->capture_default_str();
    det->add_option("--gamma", det_svm.gamma, "OCSVM RBF gamma; <0 = default")
        ->capture_default_str();
    det->add_option("--tol", det_svm.tol, "OCSVM KKT gap tolerance")->capture_default_str();
    det->add_option("--out", det_out, "flag CSV to write")->required();
    det->add_option("--scores", det_scores_out, "also write the raw scores CSV here");
    det->callback([&] {
        const data::ContaminatedSample sample = det_sample.load();

        Matrix Z = sample.X;
        detect::AnomalyScores scores;
        if (det_method == "re") {
            if (det_model.empty()) throw InvalidConfig("re needs --model");
            const auto model = manifold::load_model(det_model);
            scores = detect::AnomalyScores{
                "re", manifold::reconstruction_error(model, sample.X), {}};
        } else {
            if (!det_model.empty()) {
                const auto model = manifold::load_model(det_model);
                Z = manifold::encode(model, sample.X);
            }
            if (det_method == "lof") {
                scores = detect::lof_scores(Z, det_lof);
            } else if (det_method == "knn") {
                scores = detect::knn_scores(Z, det_knn);
            } else if (det_method == "iforest") {
                det_if.seed = det_seed;
                scores = detect::iforest_scores(Z, det_if);
            } else if (det_method == "ee") {
                det_ee.seed = det_seed;
                scores = detect::ee_scores(Z, det_ee);
            } else if (det_method == "ocsvm") {
                scores = detect::ocsvm_scores(Z, det_svm);
            } else {
                throw InvalidConfig("unknown --method '" + det_method + "'");
            }
        }

        std::size_t k = det_k;
        if (k == 0) {
            k = sample.n_anomalies();
            if (k == 0) throw InvalidConfig("--k 0 needs a sample with at least one anomaly");
        }
        const detect::FlagSet flags = detect::top_k_flags(scores, k);
        detect::save_flags_csv(det_out, flags, data::dataset_hash(sample));
        if (!det_scores_out.empty()) detect::save_scores_csv(det_scores_out, scores);
        const ConfusionCounts counts = confusion(flags, sample);
        std::cout << "flagged=" << flags.indices.size() << " recall=" << format_double(recall(counts))
                  << " precision=" << format_double(precision(counts)) << "\n";
    });

    // ---- combine ----
    auto* comb = app.add_subcommand("combine", "union of flag sets");
    std::vector<std::string> comb_inputs;
    std::string comb_out;
    comb->add_option("--inputs", comb_inputs, "flag CSVs to combine")->required()->expected(-1);
    comb->add_option("--out", comb_out, "flag CSV to write")->required();
    comb->callback([&] {
        std::vector<detect::FlagSet> sets;
        std::uint64_t hash = 0;
        for (const std::string& path : comb_inputs) {
            sets.push_back(detect::load_flags_csv(path));
            const std::uint64_t h = sidecar_hash(path);
            if (h != 0) {
                if (hash != 0 && h != hash)
                    throw MixedDatasets("flag files were produced from different samples (" +
                                        path + ")");
                hash = h;
            }
        }
        const detect::FlagSet united = detect::combine_flags(sets);
        detect::save_flags_csv(comb_out, united, hash);
        std::cout << "combined=" << united.indices.size() << " from=" << sets.size()
                  << " sets\n";
    });

    // ---- report ----
    auto* rep = app.add_subcommand("report", "re-render a report.json");
    std::string rep_input;
    std::string rep_format = "md";
    std::string rep_out;
    rep->add_option("--input", rep_input, "report.json from a run")->required();
    rep->add_option("--format", rep_format, "md|csv")->capture_default_str();
    rep->add_option("--out", rep_out, "output file (stdout when omitted)");
    rep->callback([&] {
        std::ifstream in(rep_input, std::ios::binary);
        if (!in) throw IoError("cannot open '" + rep_input + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw IoError("bad JSON in '" + rep_input + "': " + e.what());
        }
        const exp::ExperimentResult result = exp::result_from_json(j);
        std::string text;
        if (rep_format == "md") {
            text = exp::report_markdown(result);
        } else if (rep_format == "csv") {
            text = exp::report_csv(result);
        } else {
            throw InvalidConfig("--format must be md or csv, got '" + rep_format + "'");
        }
        if (rep_out.empty()) {
            std::cout << text;
        } else {
            write_text(rep_out, text);
        }
    });

    // ---- framework ----
    auto* fw = app.add_subcommand("framework", "representation partition and estimates");
    fw->require_subcommand(1);

    auto add_tau_opts = [](CLI::App* cmd, double& tau_q, double& tau_abs) {
        cmd->add_option("--tau-q", tau_q, "normal-RE quantile for tau")->capture_default_str();
        cmd->add_option("--tau-abs", tau_abs, "absolute tau (overrides --tau-q)");
    };

    auto* part = fw->add_subcommand("partition", "split a sample by representation quality");
    SampleOpts part_sample;
    part_sample.attach(part);
    std::string part_model;
    double part_tau_q = 0.95;
    double part_tau_abs = -1.0;
    std::string part_out;
    part->add_option("--model", part_model, "manifold model file")->required();
    add_tau_opts(part, part_tau_q, part_tau_abs);
    part->add_option("--out", part_out, "JSON output (stdout when omitted)");
    part->callback([&] {
        const data::ContaminatedSample sample = part_sample.load();
        const auto model = manifold::load_model(part_model);
        const Vector re = manifold::reconstruction_error(model, sample.X);
        const TauRule rule =
            part_tau_abs >= 0.0 ? TauRule::absolute(part_tau_abs) : TauRule::quantile(part_tau_q);
        const PartitionReport report =
            partition_by_representation(re, sample, rule, model.method());
        const RegimeDiagnostics regime =
            regime_diagnostics(report, model.latent_dim(), model.input_dim());
        emit_json(nlohmann::json{{"partition", report}, {"regime", regime}}, part_out);
    });

    auto* est = fw->add_subcommand("estimates", "partition-implied vs measured detection quality");
    SampleOpts est_sample;
    est_sample.attach(est);
    std::string est_model;
    std::string est_on;
    std::string est_off;
    double est_tau_q = 0.95;
    double est_tau_abs = -1.0;
    std::string est_out;
    est->add_option("--model", est_model, "manifold model file")->required();
    est->add_option("--on", est_on, "on-manifold flag CSV")->required();
    est->add_option("--off", est_off, "off-manifold flag CSV")->required();
    add_tau_opts(est, est_tau_q, est_tau_abs);
    est->add_option("--out", est_out, "JSON output (stdout when omitted)");
    est->callback([&] {
        const data::ContaminatedSample sample = est_sample.load();
        const auto model = manifold::load_model(est_model);
        const Vector re = manifold::reconstruction_error(model, sample.X);
        const TauRule rule =
            est_tau_abs >= 0.0 ? TauRule::absolute(est_tau_abs) : TauRule::quantile(est_tau_q);
        const PartitionReport report =
            partition_by_representation(re, sample, rule, model.method());
        const RegimeDiagnostics regime =
            regime_diagnostics(report, model.latent_dim(), model.input_dim());
        const detect::FlagSet on_flags = detect::load_flags_csv(est_on);
        const detect::FlagSet off_flags = detect::load_flags_csv(est_off);
        const FrameworkEstimates estimates =
            framework_estimates(report, on_flags, off_flags, sample);
        emit_json(nlohmann::json{{"partition", report},
                                 {"regime", regime},
                                 {"estimates", estimates}},
                  est_out);
    });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_cli(argc, argv);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
