#include "pla/data_synth.hpp"

#include "pla/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace pla {
namespace {

Matrix draw_centers(const SynthSpec& spec, Rng& rng) {
    const int n = spec.n_identities;
    Matrix centers(n, spec.dim);
    std::uniform_real_distribution<double> box(-spec.center_scale, spec.center_scale);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < spec.dim; ++j) centers(i, j) = box(rng);
    }
    // The last n_hard identities collide with an earlier partner.
    const int n_hard = std::min(n - 1, static_cast<int>(std::lround(spec.hard_negative_fraction * n)));
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = n - n_hard; i < n; ++i) {
        std::uniform_int_distribution<int> pick(0, std::max(0, n - n_hard - 1));
        const int partner = pick(rng);
        Eigen::RowVectorXd dir(spec.dim);
        do {
            for (int j = 0; j < spec.dim; ++j) dir[j] = gauss(rng);
        } while (dir.norm() == 0.0);
        centers.row(i) = centers.row(partner) + dir.normalized() * (2.0 * spec.intra_spread);
    }
    return centers;
}

std::string format_real(double v) {
    char buf[32];
    const int len = std::snprintf(buf, sizeof buf, "%.17g", v);
    return {buf, static_cast<std::size_t>(len)};
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

void SynthSpec::validate() const {
    auto unit = [](double f) { return f >= 0.0 && f <= 1.0; };
    if (n_identities < 2) throw ConfigError("synth: n_identities must be >= 2");
    if (samples_per_identity < 1 || dim < 1) throw ConfigError("synth: counts must be positive");
    if (!(center_scale >= 0.0) || !(intra_spread >= 0.0)) {
        throw ConfigError("synth: center_scale and intra_spread must be non-negative");
    }
    if (!unit(hard_negative_fraction) || !unit(outlier_fraction) || !unit(overhard_fraction)) {
        throw ConfigError("synth: fractions must lie in [0, 1]");
    }
}

std::string to_string(SplitTag tag) {
    switch (tag) {
        case SplitTag::train: return "train";
        case SplitTag::query: return "query";
        case SplitTag::gallery: return "gallery";
    }
    return "?";
}

SplitTag split_tag_from_string(const std::string& s) {
    if (s == "train") return SplitTag::train;
    if (s == "query") return SplitTag::query;
    if (s == "gallery") return SplitTag::gallery;
    throw InvalidInput("unknown split tag '" + s + "'");
}

bool LabeledDataset::operator==(const LabeledDataset& other) const {
    return labels == other.labels && tags == other.tags && features.rows() == other.features.rows() &&
           features.cols() == other.features.cols() && (features.array() == other.features.array()).all();
}

Matrix generate_centers(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    return draw_centers(spec, rng);
}

LabeledDataset generate(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.seed);
    const Matrix centers = draw_centers(spec, rng);
    const int n = spec.n_identities;
    const int per = spec.samples_per_identity;

    LabeledDataset ds;
    ds.features.resize(static_cast<Eigen::Index>(n) * per, spec.dim);
    ds.labels.reserve(static_cast<std::size_t>(n) * per);
    std::bernoulli_distribution overhard(spec.overhard_fraction);
    std::bernoulli_distribution outlier(spec.outlier_fraction);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_int_distribution<int> other(0, n - 2);
    Eigen::Index row = 0;
    for (int id = 0; id < n; ++id) {
        for (int s = 0; s < per; ++s, ++row) {
            int source = id;
            double spread = spec.intra_spread;
            if (overhard(rng)) {
                source = other(rng);
                if (source >= id) ++source;
            } else if (outlier(rng)) {
                spread *= 4.0;
            }
            for (int j = 0; j < spec.dim; ++j) ds.features(row, j) = centers(source, j) + spread * gauss(rng);
            ds.labels.push_back(id);
        }
    }
    ds.tags.assign(ds.labels.size(), SplitTag::train);
    return ds;
}

LabeledDataset split(LabeledDataset ds, const SplitSpec& spec, Rng& rng) {
    if (spec.query_per_identity < 1) throw InvalidInput("query_per_identity must be >= 1");
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < ds.labels.size(); ++i) members[ds.labels[i]].push_back(i);
    const int n_ids = static_cast<int>(members.size());
    if (spec.train_identities < 0 || spec.train_identities >= n_ids) {
        throw InvalidInput("train_identities must lie in [0, " + std::to_string(n_ids - 1) + "]");
    }

    std::vector<int> ids;
    for (const auto& [id, idx] : members) ids.push_back(id);
    for (int i = n_ids - 1; i > 0; --i) {
        std::uniform_int_distribution<int> pick(0, i);
        std::swap(ids[i], ids[pick(rng)]);
    }
    const std::set<int> train_ids(ids.begin(), ids.begin() + spec.train_identities);

    for (auto& [id, idx] : members) {
        if (train_ids.count(id)) {
            for (std::size_t i : idx) ds.tags[i] = SplitTag::train;
            continue;
        }
        if (idx.size() <= static_cast<std::size_t>(spec.query_per_identity)) {
            throw InvalidInput("identity " + std::to_string(id) + " has " + std::to_string(idx.size()) +
                               " samples; needs more than query_per_identity=" +
                               std::to_string(spec.query_per_identity));
        }
        for (std::size_t i = idx.size() - 1; i > 0; --i) {
            std::uniform_int_distribution<std::size_t> pick(0, i);
            std::swap(idx[i], idx[pick(rng)]);
        }
        for (std::size_t r = 0; r < idx.size(); ++r) {
            ds.tags[idx[r]] = r < static_cast<std::size_t>(spec.query_per_identity) ? SplitTag::query
                                                                                     : SplitTag::gallery;
        }
    }
    return ds;
}

namespace {

Partition gather(const LabeledDataset& ds, SplitTag tag) {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < ds.tags.size(); ++i) {
        if (ds.tags[i] == tag) rows.push_back(static_cast<Eigen::Index>(i));
    }
    Partition p;
    p.features.resize(static_cast<Eigen::Index>(rows.size()), ds.features.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        p.features.row(static_cast<Eigen::Index>(r)) = ds.features.row(rows[r]);
        p.labels.push_back(ds.labels[static_cast<std::size_t>(rows[r])]);
    }
    return p;
}

}  // namespace

QueryGallerySplit query_gallery(const LabeledDataset& ds) {
    auto q = gather(ds, SplitTag::query);
    auto g = gather(ds, SplitTag::gallery);
    return {std::move(q.features), std::move(q.labels), std::move(g.features), std::move(g.labels)};
}

Partition training_partition(const LabeledDataset& ds) {
    auto train = gather(ds, SplitTag::train);
    if (!train.labels.empty()) return train;
    return gather(ds, SplitTag::gallery);
}

void write_dataset(std::ostream& out, const LabeledDataset& ds) {
    out << "id,split";
    for (int j = 0; j < ds.dim(); ++j) out << ",f" << j;
    out << '\n';
    for (std::size_t i = 0; i < ds.size(); ++i) {
        out << ds.labels[i] << ',' << to_string(ds.tags[i]);
        for (int j = 0; j < ds.dim(); ++j) out << ',' << format_real(ds.features(static_cast<Eigen::Index>(i), j));
        out << '\n';
    }
}

LabeledDataset read_dataset(std::istream& in) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line) || line.empty()) throw ParseError(1, "empty file, expected header");
    if (line.back() == '\r') line.pop_back();
    const auto header = split_fields(line);
    if (header.size() < 3 || header[0] != "id" || header[1] != "split") {
        throw ParseError(1, "header must start with id,split followed by feature columns");
    }
    const int dim = static_cast<int>(header.size()) - 2;
    for (int j = 0; j < dim; ++j) {
        if (header[j + 2] != "f" + std::to_string(j)) {
            throw ParseError(1, "expected column f" + std::to_string(j) + ", found '" + header[j + 2] + "'");
        }
    }

    std::vector<double> values;
    LabeledDataset ds;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw ParseError(lineno, "expected " + std::to_string(header.size()) + " columns, found " +
                                         std::to_string(fields.size()));
        }
        int id = 0;
        const auto& f0 = fields[0];
        auto [p, ec] = std::from_chars(f0.data(), f0.data() + f0.size(), id);
        if (ec != std::errc{} || p != f0.data() + f0.size()) throw ParseError(lineno, "bad id '" + f0 + "'");
        try {
            ds.tags.push_back(split_tag_from_string(fields[1]));
        } catch (const InvalidInput& e) {
            throw ParseError(lineno, e.what());
        }
        ds.labels.push_back(id);
        for (int j = 0; j < dim; ++j) {
            const auto& f = fields[j + 2];
            double v = 0.0;
            auto [q, ec2] = std::from_chars(f.data(), f.data() + f.size(), v);
            if (ec2 != std::errc{} || q != f.data() + f.size() || !std::isfinite(v)) {
                throw ParseError(lineno, "bad value '" + f + "' in column f" + std::to_string(j));
            }
            values.push_back(v);
        }
    }
    if (ds.labels.empty()) throw ParseError(lineno + 1, "no data rows");
    ds.features = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), static_cast<Eigen::Index>(ds.labels.size()), dim);
    return ds;
}

void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    write_dataset(out, dataset);
    if (!out) throw Error("failed writing " + path.string());
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset " + path.string());
    return read_dataset(in);
}

}  // namespace pla
