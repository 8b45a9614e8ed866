#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace regsel {

/// Birth-weight-like study data split over covariate, exposure and
/// phenotype tables, with known signals and planted data problems.
struct SyntheticOptions {
    std::uint64_t seed = 20240917;
    std::size_t rows = 500;  // rows left after merging and NA omission
};

struct SyntheticDataset {
    std::map<std::string, std::string> files;  // name -> contents
    std::vector<std::string> signals;          // predictors that drive the response
    std::vector<std::string> sparse_columns;   // columns the 1% NA rule drops
    std::string outlier_id;
    std::size_t outlier_position = 0;          // 1-based row in the analysis design
    std::size_t analysis_rows = 0;
};

SyntheticDataset make_synthetic(const SyntheticOptions& options = {});

/// Writes the tables, schema and a run config (run.conf) into `dir`.
void write_synthetic(const SyntheticDataset& data, const std::filesystem::path& dir);

}  // namespace regsel
