#include "geods/features.hpp"

#include "geods/error.hpp"
#include "geods/hash.hpp"
#include "geods/log.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace geods {

const std::string& channel_layout() {
    static const std::string layout =
        "geods-features/1;"
        "blocks=s1_star[MPa],s2_star[MPa],delta_E[GPa],delta_nu[-];"
        "block_order=(di+1)+3(dj+1)+9(dk+1);"
        "scalars=p_fine[MPa],p_star[MPa],s3_star[MPa];"
        "targets=s1[MPa],s2[MPa];"
        "stress=effective,compression-positive,ascending";
    return layout;
}

std::string channel_layout_hash() {
    static const std::string h = sha256_hex(channel_layout()).substr(0, 16);
    return h;
}

bool has_full_neighborhood(const ScaleMap& map, Index3 c) {
    const StructuredGrid& f = map.fine();
    if (c.i < 1 || c.j < 1 || c.k < 1 || c.i + 1 >= f.nx() || c.j + 1 >= f.ny() ||
        c.k + 1 >= f.nz()) {
        return false;
    }
    const Index3 C = map.enclosing_unchecked(c);
    const StructuredGrid& g = map.coarse();
    return C.i >= 1 && C.j >= 1 && C.k >= 1 && C.i + 1 < g.nx() && C.j + 1 < g.ny() &&
           C.k + 1 < g.nz();
}

std::optional<TrainingExample> build_predictors(const ScaleMap& map, const MaterialField& fine,
                                                const MaterialField& coarse,
                                                const StressField& coarse_stress,
                                                std::size_t fine_cell) {
    const StructuredGrid& fg = map.fine();
    const StructuredGrid& cg = map.coarse();
    const Index3 c = fg.unflatten(fine_cell);
    if (!has_full_neighborhood(map, c)) {
        return std::nullopt;
    }
    const Index3 C = map.enclosing_unchecked(c);
    TrainingExample ex;
    ex.cell_id = fine_cell;
    for (int dk = -1; dk <= 1; ++dk) {
        for (int dj = -1; dj <= 1; ++dj) {
            for (int di = -1; di <= 1; ++di) {
                const int b = block_index(di, dj, dk);
                const std::size_t cn = cg.linear_unchecked({C.i + di, C.j + dj, C.k + dk});
                ex.s1_star[b] = coarse_stress.principal[cn][0];
                ex.s2_star[b] = coarse_stress.principal[cn][1];

                const Index3 n{c.i + di, c.j + dj, c.k + dk};
                const std::size_t fn = fg.linear_unchecked(n);
                const std::size_t fc = cg.linear_unchecked(map.enclosing_unchecked(n));
                ex.dE[b] = fine.E[fn] - coarse.E[fc];
                ex.dnu[b] = fine.nu[fn] - coarse.nu[fc];
            }
        }
    }
    const std::size_t Cn = cg.linear_unchecked(C);
    ex.p_fine = fine.pp[fine_cell];
    ex.p_star = coarse.pp[Cn];
    ex.s3_star = coarse_stress.principal[Cn][2];
    return ex;
}

ExtractionResult extract_examples(const ScaleMap& map, const MaterialField& fine,
                                  const MaterialField& coarse, const StressField* fine_stress,
                                  const StressField* coarse_stress,
                                  std::span<const std::size_t> cells) {
    if (fine_stress == nullptr) {
        throw DependencyError("fine-scale stress solution is required to extract examples");
    }
    if (coarse_stress == nullptr) {
        throw DependencyError("coarse-scale stress solution is required to extract examples");
    }
    if (!(fine.grid == map.fine()) || !(fine_stress->grid == map.fine()) ||
        !(coarse.grid == map.coarse()) || !(coarse_stress->grid == map.coarse())) {
        throw ShapeError("fields do not match the scale map grids");
    }
    std::vector<std::size_t> sorted(cells.begin(), cells.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    ExtractionResult out;
    out.examples.reserve(sorted.size());
    for (const std::size_t cell : sorted) {
        auto ex = build_predictors(map, fine, coarse, *coarse_stress, cell);
        if (!ex) {
            ++out.skipped;
            continue;
        }
        ex->target = {fine_stress->principal[cell][0], fine_stress->principal[cell][1]};
        out.examples.push_back(*ex);
    }
    return out;
}

namespace {

template <typename Get>
std::pair<double, double> channel_stats(std::span<const TrainingExample> xs, int per_example,
                                        Get&& get) {
    double sum = 0.0;
    for (const auto& x : xs) {
        for (int e = 0; e < per_example; ++e) sum += get(x, e);
    }
    const double n = static_cast<double>(xs.size()) * per_example;
    const double mean = sum / n;
    double ss = 0.0;
    for (const auto& x : xs) {
        for (int e = 0; e < per_example; ++e) {
            const double d = get(x, e) - mean;
            ss += d * d;
        }
    }
    return {mean, std::sqrt(ss / n)};
}

const Block& block_of(const TrainingExample& x, int ch) {
    switch (ch) {
    case Channel::s1_star: return x.s1_star;
    case Channel::s2_star: return x.s2_star;
    case Channel::delta_E: return x.dE;
    default: return x.dnu;
    }
}

Block& block_of(TrainingExample& x, int ch) {
    return const_cast<Block&>(block_of(std::as_const(x), ch));
}

double scalar_of(const TrainingExample& x, int s) {
    return s == 0 ? x.p_fine : (s == 1 ? x.p_star : x.s3_star);
}

const char* channel_name(int ch) {
    static const char* names[kInputChannels] = {"s1_star", "s2_star", "delta_E", "delta_nu",
                                                "p_fine",  "p_star",  "s3_star"};
    return names[ch];
}

// Tiny relative spread counts as constant: z-scoring it would amplify round-off.
double usable_std(double mean, double std, const char* name) {
    if (std > 1e-12 * std::max(1.0, std::abs(mean))) {
        return std;
    }
    log_warning(std::string("channel '") + name +
                "' has zero variance; normalization falls back to identity scale");
    return 1.0;
}

} // namespace

NormalizationStats fit_normalization(std::span<const TrainingExample> examples) {
    if (examples.empty()) {
        throw ConfigError("cannot fit normalization on an empty training set");
    }
    NormalizationStats s;
    for (int ch = 0; ch < kBlockChannels; ++ch) {
        auto [m, sd] = channel_stats(examples, 27, [ch](const TrainingExample& x, int e) {
            return block_of(x, ch)[static_cast<std::size_t>(e)];
        });
        s.input_mean[ch] = m;
        s.input_std[ch] = usable_std(m, sd, channel_name(ch));
    }
    for (int sc = 0; sc < kScalarChannels; ++sc) {
        auto [m, sd] = channel_stats(examples, 1, [sc](const TrainingExample& x, int) {
            return scalar_of(x, sc);
        });
        s.input_mean[kBlockChannels + sc] = m;
        s.input_std[kBlockChannels + sc] = usable_std(m, sd, channel_name(kBlockChannels + sc));
    }
    for (int t = 0; t < kTargets; ++t) {
        auto [m, sd] = channel_stats(examples, 1, [t](const TrainingExample& x, int) {
            return x.target[static_cast<std::size_t>(t)];
        });
        s.target_mean[t] = m;
        s.target_std[t] = usable_std(m, sd, t == 0 ? "target_s1" : "target_s2");
    }
    return s;
}

NetInput normalize(const TrainingExample& x, const NormalizationStats& s) {
    NetInput in;
    for (int ch = 0; ch < kBlockChannels; ++ch) {
        const Block& b = block_of(x, ch);
        for (std::size_t e = 0; e < 27; ++e) {
            in.blocks[ch][e] = (b[e] - s.input_mean[ch]) / s.input_std[ch];
        }
    }
    for (int sc = 0; sc < kScalarChannels; ++sc) {
        const int ch = kBlockChannels + sc;
        in.scalars[sc] = (scalar_of(x, sc) - s.input_mean[ch]) / s.input_std[ch];
    }
    return in;
}

TrainingExample denormalize(const NetInput& in, const NormalizationStats& s) {
    TrainingExample x;
    for (int ch = 0; ch < kBlockChannels; ++ch) {
        Block& b = block_of(x, ch);
        for (std::size_t e = 0; e < 27; ++e) {
            b[e] = in.blocks[ch][e] * s.input_std[ch] + s.input_mean[ch];
        }
    }
    x.p_fine = in.scalars[0] * s.input_std[4] + s.input_mean[4];
    x.p_star = in.scalars[1] * s.input_std[5] + s.input_mean[5];
    x.s3_star = in.scalars[2] * s.input_std[6] + s.input_mean[6];
    return x;
}

std::array<double, kTargets> normalize_target(const std::array<double, kTargets>& y,
                                              const NormalizationStats& s) {
    return {(y[0] - s.target_mean[0]) / s.target_std[0],
            (y[1] - s.target_mean[1]) / s.target_std[1]};
}

std::array<double, kTargets> denormalize_target(const std::array<double, kTargets>& y,
                                                const NormalizationStats& s) {
    return {y[0] * s.target_std[0] + s.target_mean[0], y[1] * s.target_std[1] + s.target_mean[1]};
}

std::pair<std::vector<TrainingExample>, std::vector<TrainingExample>> split_by_columns(
    const ColumnPartition& partition, const DataSplit& split,
    std::span<const TrainingExample> examples) {
    const std::set<int> train(split.train_columns.begin(), split.train_columns.end());
    const std::set<int> validation(split.validation_columns.begin(),
                                   split.validation_columns.end());
    const int n_columns = static_cast<int>(partition.columns().size());
    for (const std::set<int>* ids : {&train, &validation}) {
        for (int id : *ids) {
            if (id < 0 || id >= n_columns) {
                throw ConfigError("column id " + std::to_string(id) + " does not exist");
            }
        }
    }
    for (int id : train) {
        if (validation.contains(id)) {
            throw ConfigError("column " + std::to_string(id) +
                              " is in both the training and validation sets");
        }
    }
    const Dims3 d = partition.dims();
    std::vector<TrainingExample> tr, va;
    for (const auto& x : examples) {
        const auto nxy = static_cast<std::size_t>(d.nx) * d.ny;
        const Index3 c{static_cast<int>(x.cell_id % d.nx),
                       static_cast<int>((x.cell_id / d.nx) % d.ny),
                       static_cast<int>(x.cell_id / nxy)};
        const auto col = partition.column_of(c);
        if (!col) continue;
        if (train.contains(*col)) {
            tr.push_back(x);
        } else if (validation.contains(*col)) {
            va.push_back(x);
        }
    }
    return {std::move(tr), std::move(va)};
}

} // namespace geods
