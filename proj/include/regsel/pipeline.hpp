#pragma once

#include "regsel/crossval.hpp"
#include "regsel/dataset.hpp"
#include "regsel/diagnostics.hpp"
#include "regsel/error.hpp"
#include "regsel/linmodel.hpp"
#include "regsel/selection.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace regsel {

enum class Stage { prep, prune, select, diagnose, cv, report, all };

std::string_view to_string(Stage s);
Stage parse_stage(std::string_view text);

/// Error raised inside a pipeline stage; what() reads
/// "[stage] message (hint: ...)".
class StageError : public Error {
public:
    StageError(Stage stage, const std::string& message, const std::string& hint);
    Stage stage() const { return stage_; }

private:
    Stage stage_;
};

inline constexpr double kDefaultNaRatio = 0.01;
inline constexpr std::size_t kDefaultTopInfluence = 15;

enum class StepwiseStart { full, null };

struct RunConfig {
    /// Predictor tables, merged by id in order.
    std::vector<std::filesystem::path> predictor_tables;
    /// Optional separate response table, joined by id.
    std::optional<std::filesystem::path> response_table;
    std::filesystem::path schema;
    char delimiter = ',';

    double na_ratio = kDefaultNaRatio;
    FactorSelection factors = std::vector<std::string>{};
    std::size_t max_levels = kDefaultMaxLevels;
    double vstar = kDefaultVifThreshold;
    std::vector<Direction> modes{Direction::forward, Direction::backward, Direction::both};
    double penalty = kDefaultAicPenalty;
    StepwiseStart stepwise_start = StepwiseStart::full;
    /// 1-based positions in the analysis design.
    std::vector<std::size_t> exclude_rows;
    std::size_t top_influence = kDefaultTopInfluence;
    std::size_t replications = kDefaultReplications;
    double train_fraction = kDefaultTrainFraction;
    std::uint64_t seed = kDefaultSeed;
    std::size_t workers = 1;
    bool log_response = false;
    /// "auto" (narrowest MSPE IQR) or a mode name.
    std::string chosen_model = "auto";
    std::filesystem::path out_dir = "regsel_out";
};

/// Parses "key = value" lines; '#' starts a comment. Relative paths are
/// resolved against `base_dir`.
RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Applies one "key=value" override on top of a config.
void apply_config_override(RunConfig& config, const std::string& key, const std::string& value,
                           const std::filesystem::path& base_dir = {});

/// Output-directory override read from the environment.
inline constexpr const char* kOutDirVariable = "REGSEL_OUT_DIR";

/// Replaces config.out_dir with the environment override when it is set.
void apply_environment(RunConfig& config);

/// File name -> contents. Every file is a function of inputs and config.
struct ReportBundle {
    std::map<std::string, std::string> files;

    void merge(const ReportBundle& other);
    void write(const std::filesystem::path& dir) const;
};

/// Runs one stage (or all of them) against config.out_dir. Stages after
/// prep read the checkpoints that earlier stages left in
/// out_dir/checkpoints. The returned bundle holds the files this call
/// emitted; they are also written to out_dir.
ReportBundle run_stage(const RunConfig& config, Stage stage);

inline ReportBundle run_pipeline(const RunConfig& config) { return run_stage(config, Stage::all); }

/// Round-trip serialization of an encoded design (values at full precision).
void write_design_checkpoint(const DesignMatrix& design, const std::filesystem::path& dir);
DesignMatrix read_design_checkpoint(const std::filesystem::path& dir);

struct ResidualDiagnostics {
    Eigen::VectorXd residuals;
    Eigen::VectorXd fitted;
    /// Internally studentized; rows with leverage 1 are NaN and a zero
    /// residual variance gives all zeros.
    Eigen::VectorXd studentized;
    Eigen::VectorXd qq_sample;       // sorted studentized residuals
    Eigen::VectorXd qq_theoretical;  // normal quantiles at (i - 0.5)/n
    Histogram histogram;
};

ResidualDiagnostics residual_diagnostics(const FittedModel& model);

/// index/residual, fitted/residual, QQ and histogram tables keyed by
/// "<prefix>_index.tsv" etc.
std::map<std::string, std::string> residual_diagnostic_files(const FittedModel& model, const std::string& prefix);

}  // namespace regsel
