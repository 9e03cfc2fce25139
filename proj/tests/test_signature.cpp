#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "lss/errors.hpp"
#include "lss/signature.hpp"
#include "lss/windowing.hpp"
#include "support.hpp"

#include <algorithm>
#include <set>

using namespace lss;
using namespace lss::test;

namespace {

LatentTrace trace_of(std::vector<Eigen::Vector2d> pts)
{
    LatentTrace t;
    t.points = std::move(pts);
    return t;
}

LatentTrace random_trace(std::mt19937_64& rng, int n)
{
    std::uniform_real_distribution<double> u(1e-6, 1.0 - 1e-6);
    LatentTrace t;
    for (int i = 0; i < n; ++i) t.points.emplace_back(u(rng), u(rng));
    return t;
}

Autoencoder random_ae(std::mt19937_64& rng, int d)
{
    std::uniform_real_distribution<double> w(-1.0, 1.0);
    Autoencoder p(d, 1);
    for (std::size_t i = 0; i < p.size(); ++i) p.at(i) = w(rng);
    return p;
}

}  // namespace

TEST_CASE("trace: one point per window, inside the unit square")
{
    std::mt19937_64 rng(1);
    const TimeSeries s = make_series(random_vector(rng, 300, 0.0, 1.0));
    const LatentTrace t = latent_trace(random_ae(rng, 10), random_ae(rng, 10), s, 10, 10);
    REQUIRE(t.points.size() == 291);
    for (const auto& p : t.points) {
        CHECK(p.x() > 0.0);
        CHECK(p.x() < 1.0);
        CHECK(p.y() > 0.0);
        CHECK(p.y() < 1.0);
    }
}

TEST_CASE("trace: long series length")
{
    const TimeSeries s = make_series(Vector::LinSpaced(30000, 0.0, 1.0));
    CHECK(latent_trace(Autoencoder(10, 1), Autoencoder(10, 1), s, 10, 10).points.size() == 29991);
}

TEST_CASE("trace: zero-weight encoders map everything to the centre")
{
    std::mt19937_64 rng(2);
    const TimeSeries s = make_series(random_vector(rng, 50, 0.0, 1.0));
    for (const auto& p : latent_trace(Autoencoder(10, 1), Autoencoder(5, 1), s, 10, 5).points)
        CHECK(p == Eigen::Vector2d(0.5, 0.5));
}

TEST_CASE("trace: constant series collapses to one tuple")
{
    std::mt19937_64 rng(3);
    const TimeSeries s = make_series(Vector::Constant(80, 0.5));
    const LatentTrace t = latent_trace(random_ae(rng, 10), random_ae(rng, 10), s, 10, 10);
    for (const auto& p : t.points) CHECK(p == t.points.front());
}

TEST_CASE("trace: matches the encoders applied window by window")
{
    std::mt19937_64 rng(4);
    const Autoencoder td = random_ae(rng, 10), fd = random_ae(rng, 6);
    const TimeSeries s = make_series(random_vector(rng, 40, 0.0, 1.0));
    const LatentTrace t = latent_trace(td, fd, s, 10, 6);
    const auto ws = make_windows(s, 10);
    for (std::size_t i = 0; i < ws.size(); ++i) {
        const Vector spectrum = dft_magnitude(ws[i], 6).magnitudes / 10.0;
        CHECK(t.points[i].x() == doctest::Approx(encode(td, ws[i].values)[0]).epsilon(1e-14));
        CHECK(t.points[i].y() == doctest::Approx(encode(fd, spectrum)[0]).epsilon(1e-14));
    }
}

TEST_CASE("trace: rejected inputs")
{
    const TimeSeries ok = make_series(Vector::LinSpaced(30, 0.0, 1.0));
    CHECK_THROWS_AS(latent_trace(Autoencoder(9, 1), Autoencoder(10, 1), ok, 10, 10), ValidationError);
    CHECK_THROWS_AS(latent_trace(Autoencoder(10, 1), Autoencoder(10, 1), ok, 10, 8), ValidationError);
    const TimeSeries wide = make_series(Vector::LinSpaced(30, 0.0, 1.5));
    CHECK_THROWS_AS(latent_trace(Autoencoder(10, 1), Autoencoder(10, 1), wide, 10, 10), ValidationError);
    Vector slack = Vector::LinSpaced(30, 0.0, 1.0);
    slack[3] = 1.0 + 1e-10;
    CHECK_NOTHROW(latent_trace(Autoencoder(10, 1), Autoencoder(10, 1), make_series(slack), 10, 10));
}

TEST_CASE("rasterize: single centre point")
{
    const LssImage img = rasterize(trace_of({{0.5, 0.5}}), 224);
    CHECK(img.resolution() == 224);
    CHECK(img.set_cells() == 1);
    CHECK(img.grid(112, 112) == 1);
}

TEST_CASE("rasterize: orientation and clamping")
{
    const LssImage img = rasterize(trace_of({{0.0, 1.0}, {1.0, 0.0}, {0.99, 0.99}}), 10);
    CHECK(img.grid(0, 0) == 1);  // top-left: u = 0, v = 1
    CHECK(img.grid(9, 9) == 1);  // u = 1 and v = 0 clamp into the last cells
    CHECK(img.grid(0, 9) == 1);
    CHECK(img.set_cells() == 3);
}

TEST_CASE("rasterize: duplicate points set one cell")
{
    const LssImage img = rasterize(trace_of(std::vector<Eigen::Vector2d>(500, {0.3, 0.7})), 224);
    CHECK(img.occupancy() == 1.0 / (224.0 * 224.0));
}

TEST_CASE("rasterize: matches an independent cell oracle")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int r = 2 + static_cast<int>(rng() % 60);
        const LatentTrace t = random_trace(rng, 1 + static_cast<int>(rng() % 400));
        std::set<std::pair<int, int>> cells;
        for (const auto& p : t.points)
            cells.emplace(std::min(static_cast<int>((1.0 - p.y()) * r), r - 1), std::min(static_cast<int>(p.x() * r), r - 1));
        const LssImage img = rasterize(t, r);
        CHECK(img.set_cells() == static_cast<long>(cells.size()));
        for (const auto& [row, col] : cells) CHECK(img.grid(row, col) == 1);
    }
}

TEST_CASE("rasterize: counting bounds")
{
    std::mt19937_64 rng(6);
    const LssImage img = rasterize(random_trace(rng, 29991), 224);
    CHECK(img.occupancy() <= 29991.0 / (224.0 * 224.0));
    CHECK(img.occupancy() >= 1.0 / (224.0 * 224.0));
    CHECK(img.grid.maxCoeff() == 1);
}

TEST_CASE("rasterize: order does not matter")
{
    std::mt19937_64 rng(7);
    LatentTrace t = random_trace(rng, 300);
    const LssImage before = rasterize(t, 64);
    std::shuffle(t.points.begin(), t.points.end(), rng);
    CHECK(rasterize(t, 64) == before);
}

TEST_CASE("rasterize: set cells never decrease as points are added")
{
    std::mt19937_64 rng(8);
    const LatentTrace all = random_trace(rng, 400);
    LatentTrace part;
    long previous = 0;
    for (const auto& p : all.points) {
        part.points.push_back(p);
        const long now = rasterize(part, 32).set_cells();
        CHECK(now >= previous);
        previous = now;
    }
}

TEST_CASE("rasterize: invalid requests")
{
    CHECK_THROWS_AS(rasterize(LatentTrace{}, 224), ValidationError);
    CHECK_THROWS_AS(rasterize(trace_of({{0.5, 0.5}}), 1), ValidationError);
}

TEST_CASE("pgm: exact round trip and byte layout")
{
    TempDir dir("pgm");
    std::mt19937_64 rng(9);
    const LssImage img = rasterize(random_trace(rng, 3000), 224);
    write_image(img, dir / "a.pgm");
    const std::string bytes = read_bytes(dir / "a.pgm");
    const std::string header = "P5\n224 224\n255\n";
    REQUIRE(bytes.size() == header.size() + 224 * 224);
    CHECK(bytes.substr(0, header.size()) == header);
    // set cells are black on white
    for (int r = 0; r < 224; ++r)
        for (int c = 0; c < 224; ++c) {
            const auto px = static_cast<unsigned char>(bytes[header.size() + static_cast<std::size_t>(r * 224 + c)]);
            REQUIRE(px == (img.grid(r, c) ? 0 : 255));
        }
    CHECK(read_image(dir / "a.pgm") == img);
}

TEST_CASE("pgm: malformed files")
{
    TempDir dir("pgmbad");
    write_text(dir / "p2.pgm", "P2\n2 2\n255\n0 0 0 0\n");
    CHECK_THROWS_AS(read_image(dir / "p2.pgm"), ValidationError);
    write_text(dir / "text.pgm", "hello");
    CHECK_THROWS_AS(read_image(dir / "text.pgm"), ValidationError);
    write_text(dir / "rect.pgm", std::string("P5\n3 2\n255\n") + std::string(6, '\xff'));
    CHECK_THROWS_AS(read_image(dir / "rect.pgm"), ValidationError);
    write_text(dir / "short.pgm", std::string("P5\n4 4\n255\n") + std::string(5, '\xff'));
    CHECK_THROWS_AS(read_image(dir / "short.pgm"), Error);
    CHECK_THROWS_AS(read_image(dir / "none.pgm"), IoError);
}

TEST_CASE("heatmap: min-max scaled to the full byte range")
{
    TempDir dir("heat");
    Matrix heat(2, 3);
    heat << -1.0, 0.0, 1.0,
            0.5, -0.5, 1.0;
    write_heatmap_pgm(heat, dir / "h.pgm");
    const std::string bytes = read_bytes(dir / "h.pgm");
    const std::string header = "P5\n3 2\n255\n";
    REQUIRE(bytes.size() == header.size() + 6);
    const auto px = [&](int i) { return static_cast<unsigned char>(bytes[header.size() + static_cast<std::size_t>(i)]); };
    CHECK(px(0) == 0);
    CHECK(px(2) == 255);
    CHECK(px(5) == 255);
    CHECK(std::abs(px(1) - 127.5) <= 1.0);
    CHECK_THROWS_AS(write_heatmap_pgm(Matrix(0, 0), dir / "e.pgm"), ValidationError);
}
