#include "regsel/synthetic.hpp"

#include "regsel/error.hpp"
#include "regsel/rng.hpp"
#include "regsel/table.hpp"
#include "regsel/table_io.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>

namespace regsel {

namespace {

class Draws {
public:
    explicit Draws(std::uint64_t seed) : rng_(seed, 0) {}

    double uniform() { return (static_cast<double>(rng_.next() >> 11) + 0.5) * 0x1.0p-53; }

    double normal() {
        if (spare_) {
            const double v = *spare_;
            spare_.reset();
            return v;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform()));
        const double a = 2.0 * std::numbers::pi * uniform();
        spare_ = r * std::sin(a);
        return r * std::cos(a);
    }

    std::size_t below(std::size_t bound) { return static_cast<std::size_t>(rng_.below(bound)); }

private:
    StreamRng rng_;
    std::optional<double> spare_;
};

using Cell = std::optional<std::string>;

struct TextTable {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    std::string csv() const {
        std::ostringstream os;
        for (std::size_t j = 0; j < header.size(); ++j) os << (j ? "," : "") << header[j];
        os << "\n";
        for (const auto& r : rows) {
            for (std::size_t j = 0; j < r.size(); ++j) os << (j ? "," : "") << (r[j] ? *r[j] : "NA");
            os << "\n";
        }
        return os.str();
    }
};

std::string rounded(double v, int digits) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

SyntheticDataset make_synthetic(const SyntheticOptions& options) {
    if (options.rows < 100) throw ArgumentError("synthetic data needs at least 100 rows");
    Draws d(options.seed);
    SyntheticDataset out;

    // ids: covariates cover [1, n + 20], exposures [6, n + 25], phenotypes [1, n + 25];
    // the join keeps [6, n + 20] and NA omission removes 15 of those rows.
    const std::size_t n_all = options.rows + 25;
    const std::size_t first_shared = 6;
    const std::size_t last_shared = options.rows + 20;

    struct Row {
        std::size_t id = 0;
        std::vector<double> numeric;  // 40 numeric predictors
        std::vector<int> codes;       // 5 numeric-coded factors
        std::string region;
        double y = 0.0;
    };

    const std::vector<std::string> cov_numeric{"c_height", "c_weight", "c_bmi", "mo_age", "mo_bmi",
                                               "mo_height", "fa_age", "gest_age", "c_age", "income_idx"};
    std::vector<std::string> exp_numeric;
    for (int k = 1; k <= 30; ++k) {
        std::string name = "exp_" + std::string(k < 10 ? "0" : "") + std::to_string(k);
        exp_numeric.push_back(name);
    }
    const std::vector<std::string> codes{"h_cohort", "e3_sex", "h_edumc", "h_parity", "smoke_flag"};
    out.signals = {"mo_age", "gest_age", "exp_05"};

    std::vector<Row> rows(n_all);
    for (std::size_t i = 0; i < n_all; ++i) {
        Row& r = rows[i];
        r.id = i + 1;
        std::vector<double> z(40);
        for (auto& v : z) v = d.normal();
        // collinear structure: weight ~ height, bmi from both, exp pairs
        z[1] = 0.85 * z[0] + 0.53 * z[1];
        z[2] = 0.7 * z[1] - 0.69 * z[0] + 0.12 * z[2];
        z[11] = z[10] + 0.2 * z[11];
        z[13] = 0.97 * z[12] + 0.25 * z[13];
        r.numeric = {112 + 6 * z[0], 20 + 3 * z[1], 16 + 1.5 * z[2], 31 + 4.5 * z[3], 24 + 4 * z[4],
                     164 + 6 * z[5], 34 + 5 * z[6], 39.5 + 1.3 * z[7], 8 + 1.5 * z[8], 50 + 10 * z[9]};
        for (std::size_t k = 10; k < 40; ++k) {
            const bool flag = k == 36 || k == 37;
            r.numeric.push_back(flag ? (z[k] > 0.4 ? 1.0 : 0.0) : 2.0 + z[k]);
        }
        r.codes = {static_cast<int>(1 + d.below(6)), static_cast<int>(d.below(2)), static_cast<int>(1 + d.below(3)),
                   static_cast<int>(d.below(3)), d.uniform() < 0.15 ? 1 : 0};
        static const char* regions[] = {"east", "north", "south", "west"};
        r.region = regions[d.below(4)];
        r.y = 3300 + 150 * z[3] + 200 * z[7] - 120 * z[14] + 350 * d.normal();
    }

    // planted high-leverage, high-residual row
    const std::size_t outlier = first_shared - 1 + (last_shared - first_shared) * 4 / 5;
    rows[outlier].numeric[7] = 39.5 + 1.3 * 11.0;
    rows[outlier].y = 1900;
    out.outlier_id = std::to_string(rows[outlier].id);

    // 15 shared rows lose one cell each, spread over distinct columns
    std::vector<std::pair<std::size_t, std::size_t>> holes;  // (row, numeric column)
    for (std::size_t k = 0; k < 15; ++k) {
        std::size_t row = first_shared - 1 + (k * 37 + 11) % (last_shared - first_shared + 1);
        if (row == outlier) ++row;
        holes.emplace_back(row, (k * 7 + 3) % 40);
    }
    auto is_hole = [&](std::size_t row, std::size_t col) {
        for (const auto& h : holes) {
            if (h.first == row && h.second == col) return true;
        }
        return false;
    };
    auto dropped = [&](std::size_t row) {
        for (const auto& h : holes) {
            if (h.first == row) return true;
        }
        return false;
    };

    TextTable cov;
    cov.header = {"ID"};
    for (const auto& c : codes) cov.header.push_back(c);
    cov.header.push_back("h_region");
    for (const auto& c : cov_numeric) cov.header.push_back(c);
    cov.header.push_back("mo_sparse");
    out.sparse_columns.push_back("mo_sparse");

    TextTable exp;
    exp.header = {"ID"};
    for (const auto& c : exp_numeric) exp.header.push_back(c);
    exp.header.push_back("exp_sparse_a");
    exp.header.push_back("exp_sparse_b");
    out.sparse_columns.push_back("exp_sparse_a");
    out.sparse_columns.push_back("exp_sparse_b");

    TextTable phen;
    phen.header = {"ID", "e3_bw", "visit_note"};

    // exactly ceil(1%) of the exposure rows missing keeps the >= boundary exercised
    const std::size_t exp_rows = n_all - (first_shared - 1);
    const std::size_t b_missing = (exp_rows + 99) / 100;
    const std::size_t b_stride = exp_rows / b_missing;
    for (std::size_t i = 0; i < n_all; ++i) {
        const Row& r = rows[i];
        const std::string id = std::to_string(r.id);
        if (r.id <= options.rows + 20) {
            std::vector<Cell> row{id};
            for (int c : r.codes) row.push_back(std::to_string(c));
            row.push_back(r.region);
            for (std::size_t k = 0; k < 10; ++k) {
                row.push_back(is_hole(i, k) ? Cell{} : Cell{rounded(r.numeric[k], 4)});
            }
            row.push_back(d.uniform() < 0.2 ? Cell{} : Cell{rounded(50 + 5 * d.normal(), 3)});
            cov.rows.push_back(row);
        }
        if (r.id >= first_shared) {
            std::vector<Cell> row{id};
            for (std::size_t k = 10; k < 40; ++k) {
                row.push_back(is_hole(i, k) ? Cell{} : Cell{rounded(r.numeric[k], 5)});
            }
            row.push_back(d.uniform() < 0.04 ? Cell{} : Cell{rounded(d.normal(), 5)});
            const std::size_t k = i - (first_shared - 1);
            const bool hole_b = k % b_stride == b_stride / 2 && k / b_stride < b_missing;
            row.push_back(hole_b ? Cell{} : Cell{rounded(d.normal(), 5)});
            exp.rows.push_back(row);
        }
        phen.rows.push_back({id, rounded(r.y, 1), Cell{"visit" + std::to_string(1 + r.id % 3)}});
    }

    std::size_t position = 0;
    for (std::size_t i = first_shared - 1; i < last_shared; ++i) {
        if (dropped(i)) continue;
        ++position;
        if (i == outlier) out.outlier_position = position;
    }
    out.analysis_rows = position;

    out.files["covariates.csv"] = cov.csv();
    out.files["exposome.csv"] = exp.csv();
    out.files["phenotype.csv"] = phen.csv();
    out.files["schema.tsv"] =
        "# column roles; every other column is numeric\n"
        "ID\tid\n"
        "e3_bw\tresponse\n"
        "h_region\tfactor\n"
        "visit_note\texclude\n"
        "*\tnumeric\n";
    std::ostringstream conf;
    conf << "# analysis of the bundled synthetic study\n"
         << "predictors = covariates.csv, exposome.csv\n"
         << "response = phenotype.csv\n"
         << "schema = schema.tsv\n"
         << "factors = h_cohort, e3_sex, h_edumc, h_parity, smoke_flag\n"
         << "na_ratio = 0.01\n"
         << "vstar = 10\n"
         << "modes = forward, backward, both\n"
         << "penalty = 2\n"
         << "top_influence = 15\n"
         << "exclude_rows = " << out.outlier_position << "\n"
         << "replications = 8000\n"
         << "train_fraction = 0.8\n"
         << "seed = 20883271\n"
         << "log_response = true\n"
         << "workers = 0\n"
         << "out = out\n";
    out.files["run.conf"] = conf.str();
    return out;
}

void write_synthetic(const SyntheticDataset& data, const std::filesystem::path& dir) {
    for (const auto& [name, text] : data.files) write_text_file(dir / name, text);
}

}  // namespace regsel
