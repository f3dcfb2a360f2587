#include "geods/io.hpp"

#include "geods/error.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace geods::io {

static_assert(std::endian::native == std::endian::little, "artifact I/O assumes little endian");

namespace {

constexpr char kMagic[8] = {'G', 'E', 'O', 'D', 'S', 'A', 'R', 'T'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::string& out, T v) {
    char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    out.append(buf, sizeof(T));
}

template <typename T>
T take(std::string_view bytes, std::size_t& pos) {
    if (pos + sizeof(T) > bytes.size()) {
        throw IntegrityError("artifact is truncated");
    }
    T v;
    std::memcpy(&v, bytes.data() + pos, sizeof(T));
    pos += sizeof(T);
    return v;
}

void expect_kind(const Artifact& a, const char* kind) {
    if (a.kind != kind) {
        throw IntegrityError("expected a '" + std::string(kind) + "' artifact, found '" + a.kind +
                             "'");
    }
}

void check_length(const std::vector<double>& v, std::size_t n, const char* what) {
    if (v.size() != n) {
        throw IntegrityError(std::string("array '") + what + "' has the wrong length");
    }
}

} // namespace

const std::vector<double>& Artifact::array(const std::string& name) const {
    for (const auto& [n, v] : arrays) {
        if (n == name) return v;
    }
    throw IntegrityError("artifact '" + kind + "' has no array '" + name + "'");
}

void Artifact::add(std::string name, std::vector<double> values) {
    arrays.emplace_back(std::move(name), std::move(values));
}

std::string encode(const Artifact& a) {
    Json header;
    header["kind"] = a.kind;
    header["meta"] = a.meta;
    Json arrays = Json::array();
    for (const auto& [name, v] : a.arrays) {
        arrays.push_back({{"name", name}, {"length", v.size()}});
    }
    header["arrays"] = arrays;
    const std::string h = header.dump();

    std::string out(kMagic, sizeof kMagic);
    put<std::uint32_t>(out, kVersion);
    put<std::uint64_t>(out, h.size());
    out += h;
    for (const auto& [name, v] : a.arrays) {
        out.append(reinterpret_cast<const char*>(v.data()), v.size() * sizeof(double));
    }
    return out;
}

Artifact decode(std::string_view bytes) {
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) {
        throw IntegrityError("not a geods artifact (bad magic)");
    }
    std::size_t pos = sizeof kMagic;
    const auto version = take<std::uint32_t>(bytes, pos);
    if (version != kVersion) {
        throw IntegrityError("unsupported artifact version " + std::to_string(version));
    }
    const auto hlen = take<std::uint64_t>(bytes, pos);
    if (pos + hlen > bytes.size()) {
        throw IntegrityError("artifact header is truncated");
    }
    Json header;
    try {
        header = Json::parse(bytes.substr(pos, hlen));
    } catch (const std::exception& e) {
        throw IntegrityError(std::string("artifact header is not valid JSON: ") + e.what());
    }
    pos += hlen;
    Artifact a;
    try {
        a.kind = header.at("kind").get<std::string>();
        a.meta = header.at("meta");
        for (const auto& entry : header.at("arrays")) {
            const auto n = entry.at("length").get<std::size_t>();
            if (pos + n * sizeof(double) > bytes.size()) {
                throw IntegrityError("artifact data is truncated");
            }
            std::vector<double> v(n);
            std::memcpy(v.data(), bytes.data() + pos, n * sizeof(double));
            pos += n * sizeof(double);
            a.add(entry.at("name").get<std::string>(), std::move(v));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IntegrityError(std::string("malformed artifact header: ") + e.what());
    }
    if (pos != bytes.size()) {
        throw IntegrityError("artifact has trailing bytes");
    }
    return a;
}

void write_artifact(const std::filesystem::path& path, const Artifact& a) {
    write_text(path, encode(a));
}

Artifact read_artifact(const std::filesystem::path& path) { return decode(read_text(path)); }

Json grid_to_json(const StructuredGrid& g) {
    return {{"dims", {g.nx(), g.ny(), g.nz()}},
            {"spacing", {g.dx(), g.dy(), g.dz()}},
            {"origin", {g.origin()[0], g.origin()[1], g.origin()[2]}},
            {"depth_of_top", g.depth_of_top()}};
}

StructuredGrid grid_from_json(const Json& j) {
    const auto d = j.at("dims").get<std::array<int, 3>>();
    const auto s = j.at("spacing").get<std::array<double, 3>>();
    const auto o = j.at("origin").get<std::array<double, 3>>();
    return StructuredGrid({d[0], d[1], d[2]}, {s[0], s[1], s[2]}, {o[0], o[1], o[2]},
                          j.at("depth_of_top").get<double>());
}

Artifact to_artifact(const MaterialField& f) {
    Artifact a;
    a.kind = "material";
    a.meta["grid"] = grid_to_json(f.grid);
    a.add("E", f.E);
    a.add("nu", f.nu);
    a.add("rho", f.rho);
    a.add("pp", f.pp);
    return a;
}

MaterialField material_from(const Artifact& a) {
    expect_kind(a, "material");
    MaterialField f(grid_from_json(a.meta.at("grid")));
    const std::size_t n = f.grid.cell_count();
    f.E = a.array("E");
    f.nu = a.array("nu");
    f.rho = a.array("rho");
    f.pp = a.array("pp");
    check_length(f.E, n, "E");
    check_length(f.nu, n, "nu");
    check_length(f.rho, n, "rho");
    check_length(f.pp, n, "pp");
    return f;
}

namespace {

std::vector<double> flatten(const std::vector<SymTensor>& ts) {
    std::vector<double> out;
    out.reserve(6 * ts.size());
    for (const auto& t : ts) {
        out.insert(out.end(), {t.xx, t.yy, t.zz, t.yz, t.xz, t.xy});
    }
    return out;
}

std::vector<SymTensor> tensors(const std::vector<double>& v) {
    std::vector<SymTensor> out(v.size() / 6);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double* p = &v[6 * i];
        out[i] = {p[0], p[1], p[2], p[3], p[4], p[5]};
    }
    return out;
}

} // namespace

Artifact to_artifact(const StressField& f) {
    Artifact a;
    a.kind = "stress";
    a.meta["grid"] = grid_to_json(f.grid);
    a.add("sigma", flatten(f.sigma));
    a.add("eps", flatten(f.eps));
    std::vector<double> pv, pd;
    pv.reserve(3 * f.principal.size());
    pd.reserve(9 * f.principal_dirs.size());
    for (const auto& p : f.principal) pv.insert(pv.end(), p.begin(), p.end());
    for (const auto& d : f.principal_dirs) {
        for (const auto& v : d) pd.insert(pd.end(), v.begin(), v.end());
    }
    a.add("principal", std::move(pv));
    a.add("principal_dirs", std::move(pd));
    return a;
}

StressField stress_from(const Artifact& a) {
    expect_kind(a, "stress");
    StressField f(grid_from_json(a.meta.at("grid")));
    const std::size_t n = f.grid.cell_count();
    check_length(a.array("sigma"), 6 * n, "sigma");
    check_length(a.array("eps"), 6 * n, "eps");
    check_length(a.array("principal"), 3 * n, "principal");
    check_length(a.array("principal_dirs"), 9 * n, "principal_dirs");
    f.sigma = tensors(a.array("sigma"));
    f.eps = tensors(a.array("eps"));
    const auto& pv = a.array("principal");
    const auto& pd = a.array("principal_dirs");
    for (std::size_t c = 0; c < n; ++c) {
        f.principal[c] = {pv[3 * c], pv[3 * c + 1], pv[3 * c + 2]};
        for (int m = 0; m < 3; ++m) {
            const double* p = &pd[9 * c + 3 * static_cast<std::size_t>(m)];
            f.principal_dirs[c][static_cast<std::size_t>(m)] = {p[0], p[1], p[2]};
        }
    }
    return f;
}

namespace {

// Per example: four blocks, three scalars, two targets, cell id.
constexpr std::size_t kExampleWidth = 4 * 27 + 3 + 2 + 1;

} // namespace

Artifact to_artifact(std::span<const TrainingExample> xs) {
    Artifact a;
    a.kind = "examples";
    a.meta["count"] = xs.size();
    a.meta["width"] = kExampleWidth;
    a.meta["layout_hash"] = channel_layout_hash();
    std::vector<double> v;
    v.reserve(kExampleWidth * xs.size());
    for (const auto& x : xs) {
        for (const Block* b : {&x.s1_star, &x.s2_star, &x.dE, &x.dnu}) {
            v.insert(v.end(), b->begin(), b->end());
        }
        v.insert(v.end(), {x.p_fine, x.p_star, x.s3_star, x.target[0], x.target[1],
                           static_cast<double>(x.cell_id)});
    }
    a.add("examples", std::move(v));
    return a;
}

std::vector<TrainingExample> examples_from(const Artifact& a) {
    expect_kind(a, "examples");
    if (a.meta.at("layout_hash").get<std::string>() != channel_layout_hash()) {
        throw IntegrityError("examples were written with a different channel layout");
    }
    const auto n = a.meta.at("count").get<std::size_t>();
    const auto& v = a.array("examples");
    check_length(v, n * kExampleWidth, "examples");
    std::vector<TrainingExample> xs(n);
    for (std::size_t e = 0; e < n; ++e) {
        const double* p = &v[e * kExampleWidth];
        TrainingExample& x = xs[e];
        for (Block* b : {&x.s1_star, &x.s2_star, &x.dE, &x.dnu}) {
            std::copy(p, p + 27, b->begin());
            p += 27;
        }
        x.p_fine = p[0];
        x.p_star = p[1];
        x.s3_star = p[2];
        x.target = {p[3], p[4]};
        x.cell_id = static_cast<std::size_t>(p[5]);
    }
    return xs;
}

Artifact to_artifact(const DownscaledStress& d) {
    Artifact a;
    a.kind = "downscaled";
    a.meta["grid"] = grid_to_json(d.grid);
    a.meta["method"] = to_string(d.method);
    a.add("s1", d.s1);
    a.add("s2", d.s2);
    a.add("mask", std::vector<double>(d.mask.begin(), d.mask.end()));
    return a;
}

DownscaledStress downscaled_from(const Artifact& a) {
    expect_kind(a, "downscaled");
    const std::string m = a.meta.at("method").get<std::string>();
    if (m != "ml" && m != "constant_strain") {
        throw IntegrityError("unknown downscale method '" + m + "'");
    }
    DownscaledStress d(grid_from_json(a.meta.at("grid")),
                       m == "ml" ? DownscaleMethod::ml : DownscaleMethod::constant_strain);
    const std::size_t n = d.grid.cell_count();
    d.s1 = a.array("s1");
    d.s2 = a.array("s2");
    check_length(d.s1, n, "s1");
    check_length(d.s2, n, "s2");
    const auto& mask = a.array("mask");
    check_length(mask, n, "mask");
    for (std::size_t c = 0; c < n; ++c) d.mask[c] = mask[c] != 0.0 ? 1 : 0;
    return d;
}

std::string vtk_cell_scalar(const StructuredGrid& g, const std::string& name,
                            std::span<const double> values) {
    if (values.size() != g.cell_count()) {
        throw ShapeError("VTK field '" + name + "' does not match grid");
    }
    std::ostringstream os;
    os << "# vtk DataFile Version 3.0\n"
       << "geods " << name << " (z = depth below top, m)\n"
       << "ASCII\nDATASET STRUCTURED_POINTS\n"
       << "DIMENSIONS " << g.nx() + 1 << ' ' << g.ny() + 1 << ' ' << g.nz() + 1 << '\n'
       << "ORIGIN " << g.origin()[0] << ' ' << g.origin()[1] << ' ' << g.depth_of_top() << '\n'
       << "SPACING " << g.dx() << ' ' << g.dy() << ' ' << g.dz() << '\n'
       << "CELL_DATA " << g.cell_count() << '\n'
       << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    char buf[32];
    for (const double v : values) {
        // VTK readers accept "nan" for uncovered cells.
        std::snprintf(buf, sizeof buf, "%.9g\n", v);
        os << buf;
    }
    return os.str();
}

void write_vtk(const std::filesystem::path& path, const StructuredGrid& grid,
               const std::string& name, std::span<const double> values) {
    write_text(path, vtk_cell_scalar(grid, name, values));
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    // Write then rename so an interrupted run never leaves a half-written artifact.
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw Error("write failed for " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DependencyError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace geods::io
