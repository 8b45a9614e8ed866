#pragma once

#include "regsel/design.hpp"
#include "regsel/linmodel.hpp"
#include "regsel/stats.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace regsel {

struct CandidateModel {
    std::string label;
    std::vector<std::string> terms;
};

inline constexpr std::size_t kDefaultReplications = 8000;
inline constexpr double kDefaultTrainFraction = 0.8;
inline constexpr std::uint64_t kDefaultSeed = 20883271;

struct CVConfig {
    std::size_t replications = kDefaultReplications;
    double train_fraction = kDefaultTrainFraction;
    std::uint64_t seed = kDefaultSeed;
    std::vector<CandidateModel> models;
};

struct CVModelResult {
    std::string label;
    std::vector<double> mspe;   // by replication index
    std::vector<double> rmspe;
    FiveNumberSummary mspe_summary;
    FiveNumberSummary rmspe_summary;
};

struct CVResult {
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::vector<CVModelResult> models;
    std::size_t rank_deficient_fits = 0;
    /// Held-out rows whose factor level never occurred in the training split
    /// (predicted at the reference level), summed over replications and models.
    std::size_t unseen_level_rows = 0;
};

struct CVOptions {
    std::size_t workers = 1;
    FitOptions fit;
};

/// round(fraction * n) with ties to even.
std::size_t training_size(std::size_t n, double fraction);

/// Training rows of replication `replication` (sorted).
std::vector<std::size_t> training_rows(std::size_t n, std::size_t train_size, std::uint64_t seed, std::size_t replication);

/// Monte Carlo cross-validation: each replication draws one training subset
/// shared by all candidates, refits them and records the held-out MSPE.
CVResult mc_cross_validate(const DesignMatrix& data, const CVConfig& config, const CVOptions& options = {});

struct BoxplotData {
    FiveNumberSummary summary;
    double lower_fence = 0.0;
    double upper_fence = 0.0;
    std::vector<std::pair<std::size_t, double>> outliers;  // (index, value)
};

/// Summary plus fences q1 - 1.5 IQR and q3 + 1.5 IQR and the points beyond them.
BoxplotData boxplot_data(const std::vector<double>& values);

/// File name -> contents for every model's MSPE and root-MSPE boxplot data.
std::map<std::string, std::string> emit_mspe_boxplot_data(const CVResult& result);

/// One row per replication, one column per model.
std::string mspe_dump(const CVResult& result);

/// Summary tables (Min., 1st Qu., Median, Mean, 3rd Qu., Max., IQR) for MSPE
/// and root MSPE.
std::string mspe_summary_table(const CVResult& result, bool root);

}  // namespace regsel
