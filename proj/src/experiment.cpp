#include "pegasus/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "pegasus/errors.hpp"
#include "pegasus/kernels.hpp"
#include "pegasus/rng.hpp"
#include "pegasus/stats.hpp"
#include "pegasus/text.hpp"
#include "pegasus/version.hpp"

namespace pegasus::exp {

namespace {

const std::vector<std::string> kKnownDetectors = {"lof", "iforest", "ee", "ocsvm", "knn"};

bool known_detector(const std::string& d) {
    return std::find(kKnownDetectors.begin(), kKnownDetectors.end(), d) != kKnownDetectors.end();
}

std::string display_name(const std::string& detector) {
    if (detector == "re") return "RE";
    if (detector == "lof") return "LOF";
    if (detector == "iforest") return "IF";
    if (detector == "ee") return "EE";
    if (detector == "ocsvm") return "OCSVM";
    if (detector == "knn") return "kNN";
    return detector;
}

std::string mode_name(const std::string& mode) {
    if (mode == "standalone") return "Standalone";
    if (mode == "with_re") return "With RE";
    if (mode == "with_if") return "With IF";
    return mode;
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return std::string(buf);
}

std::string general(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::string(buf);
}

// Row order of the results grid: RE first, then the configured detectors.
std::vector<std::string> grid_rows(const ExperimentConfig& c) {
    std::vector<std::string> rows{"re"};
    rows.insert(rows.end(), c.detectors.begin(), c.detectors.end());
    return rows;
}

bool has_iforest(const ExperimentConfig& c) {
    return std::find(c.detectors.begin(), c.detectors.end(), "iforest") != c.detectors.end();
}

std::vector<std::string> grid_modes(const ExperimentConfig& c) {
    std::vector<std::string> modes{"standalone"};
    if (c.combine_with_re) modes.push_back("with_re");
    if (c.combine_with_if && has_iforest(c)) modes.push_back("with_if");
    return modes;
}

void validate_config(const ExperimentConfig& c) {
    if (c.dataset != "mnist" && c.dataset != "pegasus")
        throw InvalidConfig("dataset must be mnist or pegasus, got '" + c.dataset + "'");
    if (c.dataset == "mnist") {
        if (c.split != "train" && c.split != "test")
            throw InvalidConfig("mnist.split must be train or test, got '" + c.split + "'");
        if (c.anomalies.empty())
            throw InvalidConfig("sample.anomalies must list at least one class:count pair");
        for (const auto& spec : c.anomalies) {
            if (spec.cls < 0 || spec.cls > 9)
                throw InvalidConfig("anomaly class " + std::to_string(spec.cls) +
                                    " outside the label range 0..9");
            if (spec.count == 0)
                throw InvalidConfig("anomaly count for class " + std::to_string(spec.cls) +
                                    " must be >= 1");
        }
        if (c.bulk_class < 0 || c.bulk_class > 9)
            throw InvalidConfig("sample.bulk_class outside the label range 0..9");
        if (!(c.max_anomaly_fraction > 0.0 && c.max_anomaly_fraction <= 1.0))
            throw InvalidConfig("sample.max_anomaly_fraction must lie in (0,1]");
    } else {
        c.pegasus.validate();
    }

    const ManifoldSettings& m = c.manifold;
    if (m.method == "pca") {
        const bool has_latent = m.latent >= 0;
        const bool has_variance = m.variance >= 0.0;
        if (has_latent == has_variance)
            throw InvalidConfig("pca needs exactly one of manifold.latent / manifold.variance");
        if (has_latent && m.latent < 1) throw InvalidConfig("manifold.latent must be >= 1");
        if (has_variance && !(m.variance > 0.0 && m.variance <= 1.0))
            throw InvalidConfig("manifold.variance must lie in (0,1]");
    } else if (m.method == "ae") {
        if (m.variance >= 0.0)
            throw InvalidConfig("manifold.variance is a pca option; ae needs manifold.latent");
        if (m.latent < 1) throw InvalidConfig("manifold.latent must be >= 1 for ae");
        if (m.ae.hidden == 0 || m.ae.epochs == 0 || m.ae.batch_size == 0)
            throw InvalidConfig("ae layer/epoch/batch settings must be >= 1");
        if (!(m.ae.learning_rate > 0.0)) throw InvalidConfig("ae learning rate must be > 0");
        if (!(m.ae.momentum >= 0.0 && m.ae.momentum < 1.0))
            throw InvalidConfig("ae momentum must lie in [0,1)");
    } else {
        throw InvalidConfig("manifold.method must be pca or ae, got '" + m.method + "'");
    }

    if (c.run_seeds.empty()) throw InvalidConfig("run.seeds must list at least one seed");
    {
        std::set<std::uint64_t> seen(c.run_seeds.begin(), c.run_seeds.end());
        if (seen.size() != c.run_seeds.size())
            throw InvalidConfig("run.seeds contains duplicates");
    }

    std::set<std::string> seen_det;
    for (const auto& d : c.detectors) {
        if (!known_detector(d)) throw InvalidConfig("unknown detector '" + d + "'");
        if (!seen_det.insert(d).second) throw InvalidConfig("duplicate detector '" + d + "'");
    }

    for (const auto& f : c.output_formats) {
        if (f != "md" && f != "csv" && f != "json")
            throw InvalidConfig("unknown output format '" + f + "'");
    }
    if (c.threads < 0) throw InvalidConfig("threads must be >= 0");
    if (!(c.quality_max_median_re > 0.0))
        throw InvalidConfig("quality.max_median_re must be > 0");
}

data::ContaminatedSample build_sample(const ExperimentConfig& c) {
    if (c.dataset == "pegasus") return data::generate_pegasus(c.pegasus, c.pegasus_seed);
    const std::string dir = data::resolve_data_dir(c.mnist_dir);
    const data::RawDataset ds = data::load_mnist_split(dir, c.split);
    return data::build_contaminated_sample(ds, c.bulk_class, c.anomalies, c.sample_seed,
                                           c.max_anomaly_fraction);
}

std::vector<int> resolve_anomaly_classes(const data::ContaminatedSample& s) {
    std::vector<int> classes;
    if (!s.anomaly_spec.empty()) {
        for (const auto& spec : s.anomaly_spec) classes.push_back(spec.cls);
        return classes;
    }
    std::set<int> seen;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.is_anomaly[i] != 0) seen.insert(s.labels[i]);
    }
    classes.assign(seen.begin(), seen.end());
    return classes;
}

nlohmann::json config_echo(const ExperimentConfig& c);

CellResult make_cell(std::string detector, std::string mode, const detect::FlagSet& flags,
                     const data::ContaminatedSample& sample) {
    CellResult cell;
    cell.detector = std::move(detector);
    cell.mode = std::move(mode);
    cell.counts = confusion(flags, sample);
    cell.recall = recall(cell.counts);
    cell.precision = precision(cell.counts);
    cell.f1 = f1_score(cell.counts);
    for (std::size_t idx : flags.indices) ++cell.flagged_per_class[sample.labels[idx]];
    return cell;
}

}  // namespace

std::vector<data::AnomalySpec> parse_anomaly_specs(const std::string& csv) {
    std::vector<data::AnomalySpec> specs;
    for (std::string_view item : split(csv, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        const auto parts = split(item, ':');
        if (parts.size() != 2)
            throw InvalidConfig("anomaly specs must look like class:count, got '" +
                                std::string(item) + "'");
        data::AnomalySpec spec;
        spec.cls = static_cast<int>(parse_int(parts[0], "anomaly spec class"));
        const long long count = parse_int(parts[1], "anomaly spec count");
        if (count < 0) throw InvalidConfig("anomaly spec count must be >= 0");
        spec.count = static_cast<std::size_t>(count);
        specs.push_back(spec);
    }
    return specs;
}

ExperimentConfig experiment_config_from(const cfg::Config& c) {
    ExperimentConfig out;
    out.dataset = c.get_string("dataset", out.dataset);

    out.mnist_dir = c.get_string("mnist.dir", "");
    out.split = c.get_string("mnist.split", out.split);
    out.bulk_class = static_cast<int>(c.get_int("sample.bulk_class", out.bulk_class));
    out.anomalies = parse_anomaly_specs(c.get_string("sample.anomalies", ""));
    out.sample_seed = c.get_u64("sample.seed", out.sample_seed);
    out.max_anomaly_fraction = c.get_double("sample.max_anomaly_fraction", out.max_anomaly_fraction);

    out.pegasus.n_normal =
        static_cast<std::size_t>(c.get_int("pegasus.n_normal", static_cast<long long>(out.pegasus.n_normal)));
    out.pegasus.density_threshold_tau =
        c.get_double("pegasus.tau", out.pegasus.density_threshold_tau);
    out.pegasus_seed = c.get_u64("pegasus.seed", out.pegasus_seed);

    out.manifold.method = c.get_string("manifold.method", out.manifold.method);
    out.manifold.latent = c.get_int("manifold.latent", out.manifold.latent);
    out.manifold.variance = c.get_double("manifold.variance", out.manifold.variance);
    out.manifold.ae.hidden =
        static_cast<std::size_t>(c.get_int("manifold.ae.hidden", static_cast<long long>(out.manifold.ae.hidden)));
    out.manifold.ae.epochs =
        static_cast<std::size_t>(c.get_int("manifold.ae.epochs", static_cast<long long>(out.manifold.ae.epochs)));
    out.manifold.ae.batch_size = static_cast<std::size_t>(
        c.get_int("manifold.ae.batch", static_cast<long long>(out.manifold.ae.batch_size)));
    out.manifold.ae.learning_rate = c.get_double("manifold.ae.lr", out.manifold.ae.learning_rate);
    out.manifold.ae.momentum = c.get_double("manifold.ae.momentum", out.manifold.ae.momentum);

    if (c.has("run.seeds")) {
        out.run_seeds.clear();
        for (const std::string& s : c.get_list("run.seeds")) {
            const long long v = parse_int(s, "run.seeds");
            if (v < 0) throw InvalidConfig("run.seeds entries must be >= 0");
            out.run_seeds.push_back(static_cast<std::uint64_t>(v));
        }
    }

    if (c.has("detectors")) out.detectors = c.get_list("detectors");

    out.lof.k_neighbors =
        static_cast<std::size_t>(c.get_int("lof.k", static_cast<long long>(out.lof.k_neighbors)));
    out.knn.k_neighbors =
        static_cast<std::size_t>(c.get_int("knn.k", static_cast<long long>(out.knn.k_neighbors)));
    out.iforest.n_trees = static_cast<std::size_t>(
        c.get_int("iforest.trees", static_cast<long long>(out.iforest.n_trees)));
    out.iforest.subsample_size = static_cast<std::size_t>(
        c.get_int("iforest.subsample", static_cast<long long>(out.iforest.subsample_size)));
    const long long subspace = c.get_int("iforest.kurtosis_subspace", 0);
    if (subspace < 0) throw InvalidConfig("iforest.kurtosis_subspace must be >= 0");
    out.iforest.use_kurtosis_subspace = subspace > 0;
    out.iforest.subspace_size = static_cast<std::size_t>(subspace);
    out.ee.support_fraction = c.get_double("ee.support_fraction", out.ee.support_fraction);
    out.ee.n_initial_subsets = static_cast<std::size_t>(
        c.get_int("ee.subsets", static_cast<long long>(out.ee.n_initial_subsets)));
    out.ee.n_c_steps =
        static_cast<std::size_t>(c.get_int("ee.c_steps", static_cast<long long>(out.ee.n_c_steps)));
    out.ocsvm.nu = c.get_double("ocsvm.nu", out.ocsvm.nu);
    out.ocsvm.gamma = c.get_double("ocsvm.gamma", out.ocsvm.gamma);
    out.ocsvm.tol = c.get_double("ocsvm.tol", out.ocsvm.tol);
    out.ocsvm.max_iter = static_cast<std::size_t>(
        c.get_int("ocsvm.max_iter", static_cast<long long>(out.ocsvm.max_iter)));

    const std::string k = c.get_string("flags.k", "");
    if (k == "auto") {
        out.flag_k = 0;
    } else if (!k.empty()) {
        const long long v = parse_int(k, "flags.k");
        if (v < 1) throw InvalidConfig("flags.k must be >= 1 (or auto)");
        out.flag_k = static_cast<std::size_t>(v);
    }
    out.combine_with_re = c.get_bool("combine.with_re", out.combine_with_re);
    out.combine_with_if = c.get_bool("combine.with_if", out.combine_with_if);

    out.output_dir = c.get_string("output.dir", out.output_dir);
    if (c.has("output.formats")) out.output_formats = c.get_list("output.formats");
    out.write_embeddings = c.get_bool("output.embeddings", out.write_embeddings);
    out.threads = static_cast<int>(c.get_int("threads", out.threads));
    out.quality_max_median_re = c.get_double("quality.max_median_re", out.quality_max_median_re);

    const auto unused = c.unused_keys();
    if (!unused.empty()) {
        std::string msg = c.origin() + ": unknown key(s):";
        for (const auto& key : unused) msg += " " + key;
        throw InvalidConfig(msg);
    }
    validate_config(out);
    return out;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    return experiment_config_from(cfg::Config::parse_file(path));
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    validate_config(config);
    if (config.threads > 0) kernels::set_threads(config.threads);

    ExperimentResult result;
    result.config = config;

    data::ContaminatedSample sample = build_sample(config);
    result.n_points = sample.size();
    result.n_anomalies = sample.n_anomalies();
    result.input_dim = sample.X.cols();
    result.sample_hash = data::dataset_hash(sample);
    result.anomaly_classes = resolve_anomaly_classes(sample);

    if (config.flag_k == 0 && result.n_anomalies == 0)
        throw InvalidConfig("flags.k = auto needs a sample with at least one anomaly");
    result.flag_k = config.flag_k == 0 ? result.n_anomalies : config.flag_k;

    const bool with_if = config.combine_with_if && has_iforest(config);

    for (std::uint64_t seed : config.run_seeds) {
        RunResult run;
        run.seed = seed;

        manifold::ManifoldModel model;
        if (config.manifold.method == "pca") {
            const manifold::PcaTarget target =
                config.manifold.latent >= 0
                    ? manifold::PcaTarget::latent(static_cast<std::size_t>(config.manifold.latent))
                    : manifold::PcaTarget::variance(config.manifold.variance);
            model = manifold::fit_pca_manifold(sample.X, target);
        } else {
            manifold::AeTrainConfig ac = config.manifold.ae;
            ac.latent = static_cast<std::size_t>(config.manifold.latent);
            ac.seed = derive_seed(seed, 1);
            model = manifold::fit_ae_manifold(sample.X, ac);
        }
        result.latent_dim = model.latent_dim();
        run.fit_metric = model.fit_metric;

        const Matrix Z = manifold::encode(model, sample.X);
        const Vector re = manifold::reconstruction_error(model, sample.X);

        {
            std::vector<double> bulk_re;
            bulk_re.reserve(sample.size());
            for (std::size_t i = 0; i < sample.size(); ++i) {
                if (sample.is_anomaly[i] == 0) bulk_re.push_back(re[i]);
            }
            run.median_bulk_re = bulk_re.empty() ? 0.0 : quantile(std::move(bulk_re), 0.5);
            run.quality_warning = run.median_bulk_re > config.quality_max_median_re;
        }

        std::map<std::string, detect::FlagSet> flags;
        flags["re"] = detect::top_k_flags(detect::AnomalyScores{"re", re, {}}, result.flag_k);
        for (const std::string& d : config.detectors) {
            detect::AnomalyScores scores;
            if (d == "lof") {
                scores = detect::lof_scores(Z, config.lof);
            } else if (d == "knn") {
                scores = detect::knn_scores(Z, config.knn);
            } else if (d == "iforest") {
                detect::IForestParams p = config.iforest;
                p.seed = derive_seed(seed, 2);
                scores = detect::iforest_scores(Z, p);
            } else if (d == "ee") {
                detect::EeParams p = config.ee;
                p.seed = derive_seed(seed, 3);
                scores = detect::ee_scores(Z, p);
            } else {
                scores = detect::ocsvm_scores(Z, config.ocsvm);
            }
            flags[d] = detect::top_k_flags(scores, result.flag_k);
        }

        for (const std::string& row : grid_rows(config)) {
            run.cells.push_back(make_cell(row, "standalone", flags.at(row), sample));
            if (config.combine_with_re && row != "re") {
                const auto united = detect::combine_flags({flags.at(row), flags.at("re")});
                run.cells.push_back(make_cell(row, "with_re", united, sample));
            }
            if (with_if && row != "iforest") {
                const auto united = detect::combine_flags({flags.at(row), flags.at("iforest")});
                run.cells.push_back(make_cell(row, "with_if", united, sample));
            }
        }

        if (config.write_embeddings) run.embeddings_csv = embeddings_csv(Z, sample);
        result.runs.push_back(std::move(run));
    }

    write_outputs(result);
    return result;
}

const CellResult* find_cell(const RunResult& run, const std::string& detector,
                            const std::string& mode) {
    for (const CellResult& cell : run.cells) {
        if (cell.detector == detector && cell.mode == mode) return &cell;
    }
    return nullptr;
}

bool mean_recall(const ExperimentResult& r, const std::string& detector, const std::string& mode,
                 double& out) {
    double sum = 0.0;
    for (const RunResult& run : r.runs) {
        const CellResult* cell = find_cell(run, detector, mode);
        if (!cell) return false;
        sum += cell->recall;
    }
    if (r.runs.empty()) return false;
    out = sum / static_cast<double>(r.runs.size());
    return true;
}

double column_mean_recall(const ExperimentResult& r, const std::string& mode) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const std::string& row : grid_rows(r.config)) {
        double v = 0.0;
        if (mean_recall(r, row, mode, v)) {
            sum += v;
            ++count;
        }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

double mean_flagged_count(const ExperimentResult& r, const std::string& detector,
                          const std::string& mode, int cls) {
    if (r.runs.empty()) throw InvalidParams("result has no runs");
    double sum = 0.0;
    for (const RunResult& run : r.runs) {
        const CellResult* cell = find_cell(run, detector, mode);
        if (!cell)
            throw InvalidParams("no cell for detector '" + detector + "' mode '" + mode + "'");
        const auto it = cell->flagged_per_class.find(cls);
        if (it != cell->flagged_per_class.end()) sum += static_cast<double>(it->second);
    }
    return sum / static_cast<double>(r.runs.size());
}

std::string report_markdown(const ExperimentResult& r) {
    const ExperimentConfig& c = r.config;
    std::ostringstream out;

    out << "# Detection results — " << c.dataset << ", " << c.manifold.method << " (M="
        << r.latent_dim << ")\n\n";
    out << "- points: " << r.n_points << " (" << r.n_anomalies << " anomalies), input dim "
        << r.input_dim << ", latent dim " << r.latent_dim << "\n";
    out << "- flag budget k: " << r.flag_k << "\n";
    out << "- run seeds:";
    for (std::uint64_t s : c.run_seeds) out << " " << s;
    out << "\n";
    if (c.dataset == "mnist") {
        out << "- sample: split " << c.split << ", bulk class " << c.bulk_class << ", anomalies";
        for (const auto& spec : c.anomalies) out << " " << spec.cls << ":" << spec.count;
        out << ", seed " << c.sample_seed << "\n";
    } else {
        out << "- sample: synthetic horses, n_normal " << c.pegasus.n_normal << ", seed "
            << c.pegasus_seed << "\n";
    }
    {
        double fit = 0.0;
        for (const RunResult& run : r.runs) fit += run.fit_metric;
        fit /= static_cast<double>(r.runs.size());
        out << "- manifold fit metric (mean train MSE, mean across runs): " << general(fit)
            << "\n\n";
    }

    const auto rows = grid_rows(c);
    const auto modes = grid_modes(c);

    out << "## Recall (mean across runs)\n\n";
    out << "| Detector |";
    for (const auto& mode : modes) out << " " << mode_name(mode) << " |";
    out << "\n|---|";
    for (std::size_t i = 0; i < modes.size(); ++i) out << "---|";
    out << "\n";
    for (const auto& row : rows) {
        out << "| " << display_name(row) << " |";
        for (const auto& mode : modes) {
            double v = 0.0;
            out << " " << (mean_recall(r, row, mode, v) ? fixed(v, 2) : "n/a") << " |";
        }
        out << "\n";
    }
    out << "| Mean |";
    for (const auto& mode : modes) out << " " << fixed(column_mean_recall(r, mode), 2) << " |";
    out << "\n\n";

    if (!r.anomaly_classes.empty()) {
        out << "## Flagged count by true class — standalone (mean across runs)\n\n";
        out << "| Detector |";
        for (int cls : r.anomaly_classes) out << " class " << cls << " |";
        out << "\n|---|";
        for (std::size_t i = 0; i < r.anomaly_classes.size(); ++i) out << "---|";
        out << "\n";
        for (const auto& row : rows) {
            out << "| " << display_name(row) << " |";
            for (int cls : r.anomaly_classes)
                out << " " << fixed(mean_flagged_count(r, row, "standalone", cls), 1) << " |";
            out << "\n";
        }
        out << "\n";
    }

    out << "## Fit quality\n\n";
    for (const RunResult& run : r.runs) {
        out << "- seed " << run.seed << ": median bulk reconstruction MSE "
            << general(run.median_bulk_re)
            << (run.quality_warning ? "  **WARNING: exceeds " : "  (threshold ")
            << general(c.quality_max_median_re) << (run.quality_warning ? "**" : ")") << "\n";
    }
    return out.str();
}

std::string report_csv(const ExperimentResult& r) {
    std::ostringstream out;
    out << "detector,mode,seed,tp,fp,fn,tn,recall,precision,f1\n";
    for (const RunResult& run : r.runs) {
        for (const CellResult& cell : run.cells) {
            out << cell.detector << "," << cell.mode << "," << run.seed << "," << cell.counts.tp
                << "," << cell.counts.fp << "," << cell.counts.fn << "," << cell.counts.tn << ","
                << format_double(cell.recall) << "," << format_double(cell.precision) << ","
                << format_double(cell.f1) << "\n";
        }
    }
    return out.str();
}

nlohmann::json report_json(const ExperimentResult& r) {
    nlohmann::json j;
    j["tool_version"] = kVersion;
    j["dataset"] = {{"name", r.config.dataset},
                    {"n_points", r.n_points},
                    {"n_anomalies", r.n_anomalies},
                    {"input_dim", r.input_dim},
                    {"hash", r.sample_hash}};
    j["manifold"] = {{"method", r.config.manifold.method}, {"latent_dim", r.latent_dim}};
    j["flag_k"] = r.flag_k;
    j["anomaly_classes"] = r.anomaly_classes;
    j["config"] = config_echo(r.config);

    j["runs"] = nlohmann::json::array();
    for (const RunResult& run : r.runs) {
        nlohmann::json jr;
        jr["seed"] = run.seed;
        jr["fit_metric"] = run.fit_metric;
        jr["median_bulk_re"] = run.median_bulk_re;
        jr["quality_warning"] = run.quality_warning;
        jr["cells"] = nlohmann::json::array();
        for (const CellResult& cell : run.cells) {
            nlohmann::json jc;
            jc["detector"] = cell.detector;
            jc["mode"] = cell.mode;
            jc["tp"] = cell.counts.tp;
            jc["fp"] = cell.counts.fp;
            jc["fn"] = cell.counts.fn;
            jc["tn"] = cell.counts.tn;
            jc["recall"] = cell.recall;
            jc["precision"] = cell.precision;
            jc["f1"] = cell.f1;
            nlohmann::json per_class = nlohmann::json::object();
            for (const auto& [cls, count] : cell.flagged_per_class)
                per_class[std::to_string(cls)] = count;
            jc["flagged_per_class"] = per_class;
            jr["cells"].push_back(jc);
        }
        j["runs"].push_back(jr);
    }

    nlohmann::json means = nlohmann::json::object();
    for (const auto& mode : grid_modes(r.config)) {
        nlohmann::json col = nlohmann::json::object();
        for (const auto& row : grid_rows(r.config)) {
            double v = 0.0;
            if (mean_recall(r, row, mode, v)) col[row] = v;
        }
        col["column_mean"] = column_mean_recall(r, mode);
        means[mode] = col;
    }
    j["mean_recall"] = means;
    return j;
}

namespace {

nlohmann::json config_echo(const ExperimentConfig& c) {
    nlohmann::json cfg = nlohmann::json::object();
    cfg["dataset"] = c.dataset;
    if (c.dataset == "mnist") {
        cfg["mnist.split"] = c.split;
        cfg["sample.bulk_class"] = c.bulk_class;
        nlohmann::json specs = nlohmann::json::array();
        for (const auto& spec : c.anomalies)
            specs.push_back(std::to_string(spec.cls) + ":" + std::to_string(spec.count));
        cfg["sample.anomalies"] = specs;
        cfg["sample.seed"] = c.sample_seed;
        cfg["sample.max_anomaly_fraction"] = c.max_anomaly_fraction;
    } else {
        cfg["pegasus.n_normal"] = c.pegasus.n_normal;
        cfg["pegasus.tau"] = c.pegasus.resolved_tau();
        cfg["pegasus.seed"] = c.pegasus_seed;
    }
    cfg["manifold.method"] = c.manifold.method;
    if (c.manifold.latent >= 0) cfg["manifold.latent"] = c.manifold.latent;
    if (c.manifold.variance >= 0.0) cfg["manifold.variance"] = c.manifold.variance;
    if (c.manifold.method == "ae") {
        cfg["manifold.ae.hidden"] = c.manifold.ae.hidden;
        cfg["manifold.ae.epochs"] = c.manifold.ae.epochs;
        cfg["manifold.ae.batch"] = c.manifold.ae.batch_size;
        cfg["manifold.ae.lr"] = c.manifold.ae.learning_rate;
        cfg["manifold.ae.momentum"] = c.manifold.ae.momentum;
    }
    cfg["detectors"] = c.detectors;
    cfg["lof.k"] = c.lof.k_neighbors;
    cfg["knn.k"] = c.knn.k_neighbors;
    cfg["iforest.trees"] = c.iforest.n_trees;
    cfg["iforest.subsample"] = c.iforest.subsample_size;
    if (c.iforest.use_kurtosis_subspace)
        cfg["iforest.kurtosis_subspace"] = c.iforest.subspace_size;
    cfg["ee.support_fraction"] = c.ee.support_fraction;
    cfg["ee.subsets"] = c.ee.n_initial_subsets;
    cfg["ee.c_steps"] = c.ee.n_c_steps;
    cfg["ocsvm.nu"] = c.ocsvm.nu;
    cfg["ocsvm.gamma"] = c.ocsvm.gamma;
    cfg["ocsvm.tol"] = c.ocsvm.tol;
    cfg["combine.with_re"] = c.combine_with_re;
    cfg["combine.with_if"] = c.combine_with_if;
    cfg["quality.max_median_re"] = c.quality_max_median_re;
    return cfg;
}

}  // namespace

nlohmann::json provenance_json(const ExperimentResult& r) {
    const ExperimentConfig& c = r.config;
    nlohmann::json j;
    j["tool_version"] = kVersion;
    j["sample_hash"] = r.sample_hash;
    j["flag_k"] = r.flag_k;
    j["threads"] = c.threads;
    j["config"] = config_echo(c);

    j["run_seeds"] = c.run_seeds;
    nlohmann::json derived = nlohmann::json::array();
    for (std::uint64_t s : c.run_seeds) {
        derived.push_back({{"run_seed", s},
                           {"ae", derive_seed(s, 1)},
                           {"iforest", derive_seed(s, 2)},
                           {"ee", derive_seed(s, 3)}});
    }
    j["derived_seeds"] = derived;
    return j;
}

ExperimentResult result_from_json(const nlohmann::json& j) {
    try {
        ExperimentResult r;
        const nlohmann::json& jd = j.at("dataset");
        r.n_points = jd.at("n_points").get<std::size_t>();
        r.n_anomalies = jd.at("n_anomalies").get<std::size_t>();
        r.input_dim = jd.at("input_dim").get<std::size_t>();
        r.sample_hash = jd.at("hash").get<std::uint64_t>();
        r.latent_dim = j.at("manifold").at("latent_dim").get<std::size_t>();
        r.flag_k = j.at("flag_k").get<std::size_t>();
        r.anomaly_classes = j.at("anomaly_classes").get<std::vector<int>>();

        const nlohmann::json& jc = j.at("config");
        ExperimentConfig& c = r.config;
        c.dataset = jd.at("name").get<std::string>();
        c.flag_k = r.flag_k;
        if (c.dataset == "mnist") {
            c.split = jc.at("mnist.split").get<std::string>();
            c.bulk_class = jc.at("sample.bulk_class").get<int>();
            c.anomalies.clear();
            for (const auto& item : jc.at("sample.anomalies")) {
                const auto specs = parse_anomaly_specs(item.get<std::string>());
                c.anomalies.insert(c.anomalies.end(), specs.begin(), specs.end());
            }
            c.sample_seed = jc.at("sample.seed").get<std::uint64_t>();
            c.max_anomaly_fraction = jc.at("sample.max_anomaly_fraction").get<double>();
        } else {
            c.pegasus.n_normal = jc.at("pegasus.n_normal").get<std::size_t>();
            c.pegasus.density_threshold_tau = jc.at("pegasus.tau").get<double>();
            c.pegasus_seed = jc.at("pegasus.seed").get<std::uint64_t>();
        }
        c.manifold.method = jc.at("manifold.method").get<std::string>();
        c.manifold.latent =
            jc.contains("manifold.latent") ? jc.at("manifold.latent").get<long long>() : -1;
        c.manifold.variance =
            jc.contains("manifold.variance") ? jc.at("manifold.variance").get<double>() : -1.0;
        if (c.manifold.method == "ae") {
            c.manifold.ae.hidden = jc.at("manifold.ae.hidden").get<std::size_t>();
            c.manifold.ae.epochs = jc.at("manifold.ae.epochs").get<std::size_t>();
            c.manifold.ae.batch_size = jc.at("manifold.ae.batch").get<std::size_t>();
            c.manifold.ae.learning_rate = jc.at("manifold.ae.lr").get<double>();
            c.manifold.ae.momentum = jc.at("manifold.ae.momentum").get<double>();
        }
        c.detectors = jc.at("detectors").get<std::vector<std::string>>();
        c.lof.k_neighbors = jc.at("lof.k").get<std::size_t>();
        c.knn.k_neighbors = jc.at("knn.k").get<std::size_t>();
        c.iforest.n_trees = jc.at("iforest.trees").get<std::size_t>();
        c.iforest.subsample_size = jc.at("iforest.subsample").get<std::size_t>();
        if (jc.contains("iforest.kurtosis_subspace")) {
            c.iforest.use_kurtosis_subspace = true;
            c.iforest.subspace_size = jc.at("iforest.kurtosis_subspace").get<std::size_t>();
        }
        c.ee.support_fraction = jc.at("ee.support_fraction").get<double>();
        c.ee.n_initial_subsets = jc.at("ee.subsets").get<std::size_t>();
        c.ee.n_c_steps = jc.at("ee.c_steps").get<std::size_t>();
        c.ocsvm.nu = jc.at("ocsvm.nu").get<double>();
        c.ocsvm.gamma = jc.at("ocsvm.gamma").get<double>();
        c.ocsvm.tol = jc.at("ocsvm.tol").get<double>();
        c.combine_with_re = jc.at("combine.with_re").get<bool>();
        c.combine_with_if = jc.at("combine.with_if").get<bool>();
        c.quality_max_median_re = jc.at("quality.max_median_re").get<double>();

        c.run_seeds.clear();
        for (const auto& jr : j.at("runs")) {
            RunResult run;
            run.seed = jr.at("seed").get<std::uint64_t>();
            run.fit_metric = jr.at("fit_metric").get<double>();
            run.median_bulk_re = jr.at("median_bulk_re").get<double>();
            run.quality_warning = jr.at("quality_warning").get<bool>();
            for (const auto& jcell : jr.at("cells")) {
                CellResult cell;
                cell.detector = jcell.at("detector").get<std::string>();
                cell.mode = jcell.at("mode").get<std::string>();
                cell.counts.tp = jcell.at("tp").get<std::size_t>();
                cell.counts.fp = jcell.at("fp").get<std::size_t>();
                cell.counts.fn = jcell.at("fn").get<std::size_t>();
                cell.counts.tn = jcell.at("tn").get<std::size_t>();
                cell.recall = jcell.at("recall").get<double>();
                cell.precision = jcell.at("precision").get<double>();
                cell.f1 = jcell.at("f1").get<double>();
                for (const auto& [key, value] : jcell.at("flagged_per_class").items())
                    cell.flagged_per_class[static_cast<int>(parse_int(key, "flagged_per_class"))] =
                        value.get<std::size_t>();
                run.cells.push_back(std::move(cell));
            }
            c.run_seeds.push_back(run.seed);
            r.runs.push_back(std::move(run));
        }
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidConfig(std::string("results json: ") + e.what());
    }
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.good()) throw IoError("short write to '" + path.string() + "'");
}

}  // namespace

void write_outputs(const ExperimentResult& r) {
    const ExperimentConfig& c = r.config;
    if (c.output_dir.empty()) return;

    std::vector<std::pair<std::string, std::string>> files;
    for (const std::string& format : c.output_formats) {
        if (format == "md") files.emplace_back("report.md", report_markdown(r));
        if (format == "csv") files.emplace_back("report.csv", report_csv(r));
        if (format == "json") files.emplace_back("report.json", report_json(r).dump(2) + "\n");
    }
    files.emplace_back("provenance.json", provenance_json(r).dump(2) + "\n");
    if (c.write_embeddings) {
        for (const RunResult& run : r.runs)
            files.emplace_back("embeddings_seed" + std::to_string(run.seed) + ".csv",
                               run.embeddings_csv);
    }

    const std::filesystem::path dir(c.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output dir '" + c.output_dir + "': " + ec.message());
    for (const auto& [name, content] : files) write_file(dir / name, content);
}

std::string embeddings_csv(const Matrix& Z, const data::ContaminatedSample& s) {
    if (Z.rows() != s.size())
        throw ShapeMismatch("embedding has " + std::to_string(Z.rows()) + " rows for a sample of " +
                            std::to_string(s.size()) + " points");

    Matrix P;
    if (Z.cols() > 2) {
        const auto model = manifold::pca_fit(Z, manifold::PcaTarget::latent(2));
        P = manifold::pca_encode(model, Z);
    } else {
        P = Z;
    }

    std::ostringstream out;
    out << "index,is_anomaly,class,z0,z1\n";
    for (std::size_t i = 0; i < P.rows(); ++i) {
        const double z0 = P(i, 0);
        const double z1 = P.cols() > 1 ? P(i, 1) : 0.0;
        out << i << "," << static_cast<int>(s.is_anomaly[i]) << "," << s.labels[i] << ","
            << format_double(z0) << "," << format_double(z1) << "\n";
    }
    return out.str();
}

PegasusDemoResult run_pegasus_demo(const data::PegasusConfig& config, std::uint64_t seed,
                                   const detect::LofParams& lof) {
    PegasusDemoResult r;
    r.sample = data::generate_pegasus(config, seed);
    r.n_anomalies = r.sample.n_anomalies();
    if (r.n_anomalies == 0)
        throw DegenerateData("generated sample has no anomalies to demonstrate on");

    const auto model = manifold::fit_pca_manifold(r.sample.X, manifold::PcaTarget::latent(2));
    const Matrix Z = manifold::encode(model, r.sample.X);
    const Vector re = manifold::reconstruction_error(model, r.sample.X);

    r.on_flags = detect::top_k_flags(detect::lof_scores(Z, lof), r.n_anomalies);
    r.off_flags = detect::top_k_flags(detect::AnomalyScores{"re", re, {}}, r.n_anomalies);
    r.union_flags = detect::combine_flags({r.on_flags, r.off_flags});

    for (std::size_t p = 0; p < config.special_points.size(); ++p) {
        const int cls = static_cast<int>(p) + 1;
        std::size_t idx = r.sample.size();
        for (std::size_t i = 0; i < r.sample.size(); ++i) {
            if (r.sample.labels[i] == cls) {
                idx = i;
                break;
            }
        }
        if (idx == r.sample.size())
            throw DegenerateData("special point '" + config.special_points[p].name +
                                 "' missing from the generated sample");
        PegasusDemoResult::Membership m;
        m.name = config.special_points[p].name;
        m.is_anomaly = r.sample.is_anomaly[idx] != 0;
        m.in_on = r.on_flags.contains(idx);
        m.in_off = r.off_flags.contains(idx);
        r.specials.push_back(std::move(m));
    }
    return r;
}

std::string pegasus_demo_markdown(const PegasusDemoResult& r) {
    std::ostringstream out;
    out << "# Horse dataset walkthrough\n\n";
    out << "- points: " << r.sample.size() << ", true anomalies: " << r.n_anomalies << "\n";
    out << "- manifold: PCA to 2 latent dims; on-manifold detector: LOF; off-manifold: "
           "reconstruction error\n";
    out << "- each flag set holds the top " << r.n_anomalies << " scores\n\n";
    out << "| Point | True anomaly | On-manifold flags | Off-manifold flags | Union |\n";
    out << "|---|---|---|---|---|\n";
    for (const auto& m : r.specials) {
        const auto yn = [](bool b) { return b ? "yes" : "no"; };
        out << "| " << m.name << " | " << yn(m.is_anomaly) << " | " << yn(m.in_on) << " | "
            << yn(m.in_off) << " | " << yn(m.in_on || m.in_off) << " |\n";
    }
    return out.str();
}

nlohmann::json pegasus_demo_json(const PegasusDemoResult& r) {
    nlohmann::json j;
    j["tool_version"] = kVersion;
    j["n_points"] = r.sample.size();
    j["n_anomalies"] = r.n_anomalies;
    j["flag_k"] = r.n_anomalies;
    j["specials"] = nlohmann::json::array();
    for (const auto& m : r.specials) {
        j["specials"].push_back({{"name", m.name},
                                 {"is_anomaly", m.is_anomaly},
                                 {"in_on_manifold_flags", m.in_on},
                                 {"in_off_manifold_flags", m.in_off},
                                 {"in_union", m.in_on || m.in_off}});
    }
    return j;
}

}  // namespace pegasus::exp
