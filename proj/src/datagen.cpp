#include "bhfl/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bhfl/error.hpp"
#include "bhfl/simd.hpp"

namespace bhfl {

void NoiseSpec::validate() const {
    switch (kind) {
        case NoiseKind::None: return;
        case NoiseKind::LogNormalCentered:
            require(std::isfinite(mu) && std::isfinite(sigma) && sigma > 0.0, ErrorKind::InvalidConfig,
                    "lognormal sigma must be > 0");
            return;
        case NoiseKind::ParetoCentered:
            require(scale > 0.0 && std::isfinite(scale), ErrorKind::InvalidConfig, "pareto scale must be > 0");
            require(shape > 2.0 && std::isfinite(shape), ErrorKind::InvalidConfig,
                    "pareto shape must be > 2 for finite variance");
            return;
    }
}

double NoiseSpec::variance() const {
    switch (kind) {
        case NoiseKind::None: return 0.0;
        case NoiseKind::LogNormalCentered: {
            const double s2 = sigma * sigma;
            return std::expm1(s2) * std::exp(2.0 * mu + s2);
        }
        case NoiseKind::ParetoCentered:
            return scale * scale * shape / ((shape - 1.0) * (shape - 1.0) * (shape - 2.0));
    }
    return 0.0;
}

double NoiseSpec::sample(Rng& rng) const {
    switch (kind) {
        case NoiseKind::None: return 0.0;
        case NoiseKind::LogNormalCentered: return sample_lognormal_centered(mu, sigma, rng);
        case NoiseKind::ParetoCentered: return sample_pareto_centered(scale, shape, rng);
    }
    return 0.0;
}

double sample_lognormal_centered(double mu, double sigma, Rng& rng) {
    return std::exp(mu + sigma * rng.normal()) - std::exp(mu + 0.5 * sigma * sigma);
}

double sample_pareto_centered(double scale, double shape, Rng& rng) {
    require(shape > 2.0, ErrorKind::InvalidConfig, "pareto shape must be > 2");
    require(scale > 0.0, ErrorKind::InvalidConfig, "pareto scale must be > 0");
    const double u = rng.uniform_open_left();
    return scale * std::pow(u, -1.0 / shape) - shape * scale / (shape - 1.0);
}

void SyntheticSpec::validate() const {
    require(dim >= 1, ErrorKind::InvalidConfig, "synthetic dimension must be >= 1");
    require(w_star.empty() || w_star.size() == dim, ErrorKind::DimensionMismatch, "w_star has the wrong dimension");
    require(std::isfinite(feature_mu) && std::isfinite(feature_sigma) && feature_sigma >= 0.0,
            ErrorKind::InvalidConfig, "feature sigma must be >= 0");
    require(train_size >= 1, ErrorKind::InvalidConfig, "train size must be >= 1");
    noise.validate();
}

ParamVector unit_sphere_point(std::size_t dim, Rng& rng) {
    ParamVector w(dim);
    double norm = 0.0;
    while (norm < 1e-12) {
        for (auto& c : w) c = rng.normal();
        norm = std::sqrt(simd::scalar::table().squared_norm(w.data(), w.size()));
    }
    for (auto& c : w) c /= norm;
    return w;
}

namespace {

enum : std::uint64_t { kStreamWStar = 1, kStreamTrain = 2, kStreamTest = 3 };

ParamVector resolve_w_star(const SyntheticSpec& spec, std::uint64_t seed) {
    if (!spec.w_star.empty()) return spec.w_star;
    Rng rng(derive_seed(seed, kStreamWStar));
    return unit_sphere_point(spec.dim, rng);
}

template <typename Label>
Dataset draw(const SyntheticSpec& spec, const ParamVector& w_star, std::size_t count, std::uint64_t seed,
             Label&& label) {
    Rng rng(seed);
    Dataset out;
    out.samples.resize(count);
    for (auto& z : out.samples) {
        z.x.resize(spec.dim);
        for (auto& c : z.x) c = std::exp(spec.feature_mu + spec.feature_sigma * rng.normal());
        // Scalar dot keeps generated data independent of the SIMD backend.
        const double signal = simd::scalar::table().dot(z.x.data(), w_star.data(), spec.dim);
        z.y = label(signal + spec.noise.sample(rng));
    }
    return out;
}

template <typename Label>
TrainTest generate(const SyntheticSpec& spec, std::uint64_t seed, Label label) {
    spec.validate();
    const ParamVector w_star = resolve_w_star(spec, seed);
    TrainTest out;
    out.train = draw(spec, w_star, spec.train_size, derive_seed(seed, kStreamTrain), label);
    out.test = draw(spec, w_star, spec.test_size, derive_seed(seed, kStreamTest), label);
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cell.push_back('"');
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return s.substr(first, last - first + 1);
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(ErrorKind::MissingColumn, "CSV has no column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

TrainTest gen_linear(const SyntheticSpec& spec, std::uint64_t seed) {
    return generate(spec, seed, [](double z) { return z; });
}

TrainTest gen_logistic(const SyntheticSpec& spec, std::uint64_t seed) {
    return generate(spec, seed, [](double z) { return sigmoid(z) - 0.5 >= 0.0 ? 1.0 : -1.0; });
}

void shuffle(Dataset& data, std::uint64_t seed) {
    Rng rng(seed);
    for (std::size_t i = data.size(); i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(data.samples[i - 1], data.samples[j]);
    }
}

std::vector<Dataset> partition(const Dataset& data, std::size_t m, std::uint64_t seed) {
    require(m >= 1, ErrorKind::IndivisibleSplit, "cannot split across zero devices");
    if (data.size() % m != 0)
        throw Error(ErrorKind::IndivisibleSplit, std::to_string(data.size()) + " records do not split evenly across " +
                                                     std::to_string(m) + " devices");
    Dataset shuffled = data;
    shuffle(shuffled, seed);
    const std::size_t n = data.size() / m;
    std::vector<Dataset> shards(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto first = shuffled.samples.begin() + static_cast<std::ptrdiff_t>(i * n);
        shards[i].samples.assign(std::make_move_iterator(first),
                                 std::make_move_iterator(first + static_cast<std::ptrdiff_t>(n)));
    }
    return shards;
}

Standardizer Standardizer::fit(const Dataset& data) {
    require(!data.empty(), ErrorKind::EmptyInput, "cannot standardize an empty dataset");
    const std::size_t d = data.feature_dim();
    Standardizer st;
    st.mean.assign(d, 0.0);
    st.stddev.assign(d, 0.0);
    const double inv_n = 1.0 / static_cast<double>(data.size());
    for (const auto& z : data.samples)
        for (std::size_t k = 0; k < d; ++k) st.mean[k] += z.x[k];
    for (auto& m : st.mean) m *= inv_n;
    for (const auto& z : data.samples)
        for (std::size_t k = 0; k < d; ++k) {
            const double c = z.x[k] - st.mean[k];
            st.stddev[k] += c * c;
        }
    for (auto& s : st.stddev) {
        s = std::sqrt(s * inv_n);
        // Constant columns are centered but not scaled.
        if (s == 0.0) s = 1.0;
    }
    return st;
}

void Standardizer::apply(Dataset& data) const {
    for (auto& z : data.samples) {
        require(z.x.size() == mean.size(), ErrorKind::DimensionMismatch, "standardizer fitted on other features");
        for (std::size_t k = 0; k < z.x.size(); ++k) z.x[k] = (z.x[k] - mean[k]) / stddev[k];
    }
}

void append_bias(Dataset& data) {
    for (auto& z : data.samples) z.x.push_back(1.0);
}

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open CSV file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ParseError(1, "", "missing header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) h = trim(h);

    const std::size_t label_idx = column_index(header, schema.label_column);
    std::vector<std::size_t> feature_idx;
    if (schema.feature_columns.empty()) {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (i != label_idx) feature_idx.push_back(i);
    } else {
        for (const auto& name : schema.feature_columns) feature_idx.push_back(column_index(header, name));
    }
    require(!feature_idx.empty(), ErrorKind::MissingColumn, "CSV schema selects no feature columns");

    const auto parse_cell = [&](const std::vector<std::string>& cells, std::size_t col, std::size_t row) {
        const std::string text = trim(cells[col]);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (text.empty() || ec != std::errc() || ptr != text.data() + text.size())
            throw ParseError(row, header[col], "'" + text + "' is not a number");
        if (!std::isfinite(value)) throw ParseError(row, header[col], "value is not finite");
        return value;
    };

    Dataset data;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty() || trim(line) == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError(row, "", "expected " + std::to_string(header.size()) + " fields, found " +
                                          std::to_string(cells.size()));
        Sample z;
        z.x.reserve(feature_idx.size() + (schema.add_bias ? 1 : 0));
        for (const auto col : feature_idx) z.x.push_back(parse_cell(cells, col, row));
        z.y = parse_cell(cells, label_idx, row);
        data.samples.push_back(std::move(z));
    }
    require(!data.empty(), ErrorKind::EmptyInput, "CSV file '" + path + "' has no data rows");
    if (schema.standardize) Standardizer::fit(data).apply(data);
    if (schema.add_bias) append_bias(data);
    return data;
}

}  // namespace bhfl
