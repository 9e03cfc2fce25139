#include "lss/synthgen.hpp"

#include "lss/errors.hpp"
#include "lss/series_io.hpp"

#include <json.hpp>
#include <unsupported/Eigen/FFT>

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace lss {

namespace {

using State = std::array<double, 3>;

State lorenz_rhs(const LorenzParams& p, const State& s)
{
    return {p.sigma * (s[1] - s[0]), s[0] * (p.rho - s[2]) - s[1], s[0] * s[1] - p.beta * s[2]};
}

State axpy(const State& x, double a, const State& k)
{
    return {x[0] + a * k[0], x[1] + a * k[1], x[2] + a * k[2]};
}

State rk4_step(const LorenzParams& p, const State& s, double h)
{
    const State k1 = lorenz_rhs(p, s);
    const State k2 = lorenz_rhs(p, axpy(s, 0.5 * h, k1));
    const State k3 = lorenz_rhs(p, axpy(s, 0.5 * h, k2));
    const State k4 = lorenz_rhs(p, axpy(s, h, k3));
    State out;
    for (int i = 0; i < 3; ++i) out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

std::string make_id(SeriesKind kind, long index)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04ld", to_string(kind).c_str(), index);
    return buf;
}

constexpr std::array<SeriesKind, 4> kAllKinds{SeriesKind::Lorenz, SeriesKind::Logistic,
                                              SeriesKind::White, SeriesKind::Pink};

}  // namespace

TimeSeries gen_lorenz(const LorenzParams& params, std::uint64_t seed)
{
    if (!(params.dt_integration > 0.0)) throw ValidationError("Lorenz dt_integration must be > 0");
    if (params.n_steps < 1) throw ValidationError("Lorenz n_steps must be >= 1");

    State s{params.x0, params.y0, params.z0};
    if (params.seed_jitter > 0.0) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> jitter(-params.seed_jitter, params.seed_jitter);
        for (double& c : s) c += jitter(rng);
    }
    const int component = static_cast<int>(params.observable);

    TimeSeries out;
    out.values.resize(params.n_steps);
    out.dt = params.dt_integration;
    out.label = Label::NonStochastic;
    out.kind = SeriesKind::Lorenz;
    for (long i = 0; i < params.n_steps; ++i) {
        s = rk4_step(params, s, params.dt_integration);
        if (!std::isfinite(s[0]) || !std::isfinite(s[1]) || !std::isfinite(s[2]))
            throw DivergenceError("Lorenz integration blew up at step " + std::to_string(i));
        out.values[i] = s[component];
    }
    return out;
}

TimeSeries gen_logistic(double r, double x0, long length)
{
    if (!(r > 0.0 && r <= 4.0)) throw ValidationError("logistic growth rate must lie in (0, 4]");
    if (!(x0 > 0.0 && x0 < 1.0)) throw ValidationError("logistic x0 must lie in (0, 1)");
    if (length < 1) throw ValidationError("length must be >= 1");

    TimeSeries out;
    out.values.resize(length);
    out.label = Label::NonStochastic;
    out.kind = SeriesKind::Logistic;
    double x = x0;
    for (long i = 0; i < length; ++i) {
        out.values[i] = x;
        x = r * x * (1.0 - x);
    }
    return out;
}

double draw_logistic_x0(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(0.05, 0.95);
    for (;;) {
        const double x = dist(rng);
        if (std::abs(x - 0.75) > 1e-6 && std::abs(x - 0.5) > 1e-6) return x;
    }
}

TimeSeries gen_white_noise(long length, std::uint64_t seed)
{
    if (length < 1) throw ValidationError("length must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    TimeSeries out;
    out.values.resize(length);
    for (long i = 0; i < length; ++i) out.values[i] = normal(rng);
    out.label = Label::Stochastic;
    out.kind = SeriesKind::White;
    return out;
}

TimeSeries gen_pink_noise(long length, std::uint64_t seed, double exponent)
{
    if (length < 2) throw ValidationError("pink noise needs length >= 2");
    const TimeSeries white = gen_white_noise(length, seed);

    Eigen::FFT<double> fft;
    std::vector<double> time(white.values.data(), white.values.data() + length);
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, time);

    spectrum[0] = 0.0;
    for (long k = 1; k < length; ++k) {
        const long f = std::min(k, length - k);
        spectrum[k] *= std::pow(static_cast<double>(f), -0.5 * exponent);
    }
    fft.inv(time, spectrum);

    TimeSeries out;
    out.values = Eigen::Map<const Vector>(time.data(), length);
    out.values.array() -= out.values.mean();
    const double sd = std::sqrt(out.values.squaredNorm() / static_cast<double>(length));
    if (sd > 0.0) out.values /= sd;
    out.label = Label::Stochastic;
    out.kind = SeriesKind::Pink;
    return out;
}

std::map<Label, std::size_t> DatasetManifest::counts_per_label() const
{
    std::map<Label, std::size_t> counts;
    for (const auto& e : entries) ++counts[e.label];
    return counts;
}

std::map<SeriesKind, long> parse_counts(const std::string& text)
{
    std::map<SeriesKind, long> counts;
    for (SeriesKind k : kAllKinds) counts[k] = 0;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ValidationError("bad counts item '" + item + "'");
        const SeriesKind kind = kind_from_string(item.substr(0, eq));
        long n = 0;
        try {
            std::size_t used = 0;
            n = std::stol(item.substr(eq + 1), &used);
            if (used != item.size() - eq - 1) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ValidationError("bad count in '" + item + "'");
        }
        if (n < 0) throw ValidationError("negative count in '" + item + "'");
        counts[kind] = n;
    }
    return counts;
}

TimeSeries generate_member(SeriesKind kind, long index, long length, std::uint64_t master_seed)
{
    const std::uint64_t seed =
        mix_seed(master_seed, static_cast<std::uint64_t>(kind) * 1000003ULL + static_cast<std::uint64_t>(index));
    TimeSeries s;
    switch (kind) {
    case SeriesKind::Lorenz: {
        LorenzParams p;
        p.n_steps = length;
        s = gen_lorenz(p, seed);
        break;
    }
    case SeriesKind::Logistic: s = gen_logistic(4.0, draw_logistic_x0(seed), length); break;
    case SeriesKind::White: s = gen_white_noise(length, seed); break;
    case SeriesKind::Pink: s = gen_pink_noise(length, seed); break;
    }
    s.id = make_id(kind, index);
    return s;
}

DatasetManifest gen_dataset(const std::filesystem::path& output_dir, const CorpusSpec& spec,
                            std::uint64_t master_seed)
{
    long total = 0;
    for (const auto& [kind, n] : spec.counts) {
        if (n < 0) throw ValidationError("negative count for " + to_string(kind));
        total += n;
    }
    if (total == 0) throw ValidationError("corpus specification requests no series");
    if (spec.length < 2) throw ValidationError("series length must be >= 2");

    std::error_code ec;
    std::filesystem::create_directories(output_dir, ec);
    if (ec) throw IoError("cannot create " + output_dir.string() + ": " + ec.message());

    DatasetManifest manifest;
    for (SeriesKind kind : kAllKinds) {
        const auto it = spec.counts.find(kind);
        const long n = it == spec.counts.end() ? 0 : it->second;
        for (long i = 0; i < n; ++i) {
            const TimeSeries s = generate_member(kind, i, spec.length, master_seed);
            const std::string file = s.id + ".txt";
            write_series(s, output_dir / file);
            const std::uint64_t seed = mix_seed(
                master_seed, static_cast<std::uint64_t>(kind) * 1000003ULL + static_cast<std::uint64_t>(i));
            manifest.entries.push_back({s.id, file, s.label, kind, seed});
        }
    }
    write_manifest(manifest, output_dir / "manifest.json");
    return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path)
{
    nlohmann::json doc;
    doc["entries"] = nlohmann::json::array();
    for (const auto& e : manifest.entries) {
        nlohmann::json item{{"id", e.id}, {"path", e.path}, {"label", to_string(e.label)}};
        if (e.kind) item["kind"] = to_string(*e.kind);
        item["seed"] = e.seed;
        doc["entries"].push_back(std::move(item));
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

DatasetManifest read_manifest(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& ex) {
        throw ValidationError("malformed manifest " + path.string() + ": " + ex.what());
    }
    DatasetManifest manifest;
    try {
        for (const auto& e : doc.at("entries")) {
            ManifestEntry entry;
            entry.id = e.at("id").get<std::string>();
            entry.path = e.at("path").get<std::string>();
            entry.label = label_from_string(e.at("label").get<std::string>());
            if (e.contains("kind")) entry.kind = kind_from_string(e.at("kind").get<std::string>());
            entry.seed = e.value("seed", std::uint64_t{0});
            manifest.entries.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw ValidationError("malformed manifest " + path.string() + ": " + ex.what());
    }
    return manifest;
}

}  // namespace lss
