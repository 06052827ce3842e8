#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "pegasus/config.hpp"
#include "pegasus/dataset.hpp"
#include "pegasus/detectors/common.hpp"
#include "pegasus/detectors/elliptic.hpp"
#include "pegasus/detectors/iforest.hpp"
#include "pegasus/detectors/knn.hpp"
#include "pegasus/detectors/lof.hpp"
#include "pegasus/detectors/ocsvm.hpp"
#include "pegasus/manifold.hpp"
#include "pegasus/metrics.hpp"
#include "pegasus/synthetic.hpp"

namespace pegasus::exp {

struct ManifoldSettings {
    std::string method = "pca";  // pca | ae
    long long latent = -1;       // exclusive with variance
    double variance = -1.0;      // pca only, target explained-variance share
    manifold::AeTrainConfig ae;  // latent/seed fields are overwritten per run
};

struct ExperimentConfig {
    std::string dataset = "mnist";  // mnist | pegasus

    // mnist sampling
    std::string mnist_dir;  // "" = $PEGASUS_DATA_DIR, else ./data/mnist
    std::string split = "test";
    int bulk_class = 1;
    std::vector<data::AnomalySpec> anomalies;
    std::uint64_t sample_seed = 7;
    double max_anomaly_fraction = 0.10;

    // synthetic horse dataset
    data::PegasusConfig pegasus = data::default_pegasus_config();
    std::uint64_t pegasus_seed = 42;

    ManifoldSettings manifold;
    std::vector<std::uint64_t> run_seeds{1};

    std::vector<std::string> detectors{"lof", "iforest", "ee", "ocsvm", "knn"};
    detect::LofParams lof;
    detect::KnnParams knn;
    detect::IForestParams iforest;  // seed is derived per run
    detect::EeParams ee;            // ditto
    detect::OcsvmParams ocsvm;

    std::size_t flag_k = 240;  // 0 = match the number of true anomalies
    bool combine_with_re = true;
    bool combine_with_if = true;

    std::string output_dir;  // "" = keep everything in memory
    std::vector<std::string> output_formats{"md", "csv", "json"};
    bool write_embeddings = false;
    int threads = 0;  // 0 = leave the kernel thread count alone
    double quality_max_median_re = 0.02;
};

// Build from a parsed key=value config; rejects unknown keys.
ExperimentConfig experiment_config_from(const cfg::Config& c);
ExperimentConfig load_experiment_config(const std::string& path);

// "7:120,8:120" -> anomaly specs (the sample.anomalies syntax).
std::vector<data::AnomalySpec> parse_anomaly_specs(const std::string& csv);

// One detector row in one column of the results grid, for one run seed.
struct CellResult {
    std::string detector;  // re | lof | iforest | ee | ocsvm | knn
    std::string mode;      // standalone | with_re | with_if
    ConfusionCounts counts;
    double recall = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    std::map<int, std::size_t> flagged_per_class;  // true class of flagged rows
};

struct RunResult {
    std::uint64_t seed = 0;
    double fit_metric = 0.0;  // mean training reconstruction MSE
    double median_bulk_re = 0.0;
    bool quality_warning = false;
    std::vector<CellResult> cells;
    std::string embeddings_csv;  // filled only when requested
};

struct ExperimentResult {
    ExperimentConfig config;
    std::size_t n_points = 0;
    std::size_t n_anomalies = 0;
    std::size_t input_dim = 0;
    std::size_t latent_dim = 0;
    std::size_t flag_k = 0;  // resolved (auto -> |A|)
    std::uint64_t sample_hash = 0;
    std::vector<int> anomaly_classes;  // column order of per-class tables
    std::vector<RunResult> runs;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

const CellResult* find_cell(const RunResult& run, const std::string& detector,
                            const std::string& mode);

// Mean recall across run seeds for one cell; false when the cell is absent
// (self-unions and disabled columns).
bool mean_recall(const ExperimentResult& r, const std::string& detector, const std::string& mode,
                 double& out);

// The grid's Mean row: average of the per-detector mean recalls present in
// the column (every non-absent row counts, reconstruction error included).
double column_mean_recall(const ExperimentResult& r, const std::string& mode);

// Mean count of flagged rows whose true class is cls, across run seeds.
double mean_flagged_count(const ExperimentResult& r, const std::string& detector,
                          const std::string& mode, int cls);

std::string report_markdown(const ExperimentResult& r);
std::string report_csv(const ExperimentResult& r);
nlohmann::json report_json(const ExperimentResult& r);
nlohmann::json provenance_json(const ExperimentResult& r);

// Inverse of report_json, so reports can be re-rendered offline.
ExperimentResult result_from_json(const nlohmann::json& j);

// Creates config.output_dir and writes report.{md,csv,json} (as configured),
// provenance.json, and per-seed embeddings CSVs. Everything is assembled in
// memory before the first byte is written. No-op when output_dir is "".
void write_outputs(const ExperimentResult& r);

// index,is_anomaly,class,z0,z1 — Z itself when M <= 2 (z1 = 0 for M == 1),
// otherwise the 2-component PCA projection of Z.
std::string embeddings_csv(const Matrix& Z, const data::ContaminatedSample& s);

// The horse-dataset walkthrough: PCA to 2 latent dims, LOF on the embedding,
// reconstruction error off it, both flag sets sized to the true anomaly
// count.
struct PegasusDemoResult {
    data::ContaminatedSample sample;
    std::size_t n_anomalies = 0;
    detect::FlagSet on_flags;
    detect::FlagSet off_flags;
    detect::FlagSet union_flags;

    struct Membership {
        std::string name;
        bool is_anomaly = false;
        bool in_on = false;
        bool in_off = false;
    };
    std::vector<Membership> specials;  // config order
};

PegasusDemoResult run_pegasus_demo(const data::PegasusConfig& config = data::default_pegasus_config(),
                                   std::uint64_t seed = 42,
                                   const detect::LofParams& lof = detect::LofParams{});
std::string pegasus_demo_markdown(const PegasusDemoResult& r);
nlohmann::json pegasus_demo_json(const PegasusDemoResult& r);

}  // namespace pegasus::exp
