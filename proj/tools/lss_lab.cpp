#include "lss/autoencoder.hpp"
#include "lss/baseline_ci.hpp"
#include "lss/classifier.hpp"
#include "lss/errors.hpp"
#include "lss/ingest.hpp"
#include "lss/pipeline.hpp"
#include "lss/series_io.hpp"
#include "lss/signature.hpp"
#include "lss/synthgen.hpp"
#include "lss/windowing.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

namespace fs = std::filesystem;
using namespace lss;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitDivergence = 4;

int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Validation: return kExitValidation;
    case ErrorKind::Io: return kExitIo;
    case ErrorKind::Divergence: return kExitDivergence;
    }
    return 1;
}

Domain domain_from_string(const std::string& s)
{
    if (s == "td") return Domain::Time;
    if (s == "fd") return Domain::Frequency;
    throw ValidationError("unknown domain '" + s + "' (expected td or fd)");
}

SampleFormat format_from_string(const std::string& s)
{
    if (s == "plain") return SampleFormat::PlainColumn;
    if (s == "tv") return SampleFormat::TwoColumnTimeValue;
    throw ValidationError("unknown format '" + s + "' (expected plain or tv)");
}

void print_prediction(const Prediction& p)
{
    std::printf("label=%s c_s=%.6f c_ns=%.6f\n", short_name(p.label).c_str(), p.c_s, p.c_ns);
}

void write_cam(const CamMap& map, const fs::path& pgm)
{
    write_heatmap_pgm(map.upsampled, pgm);
    fs::path csv = pgm;
    csv.replace_extension(".csv");
    write_cam_csv(map.heat, csv);
    if (map.degenerate) std::cerr << "warning: class weights are all zero; CAM is degenerate\n";
}

// --- generate --------------------------------------------------------------

struct GenerateArgs {
    fs::path out;
    std::uint64_t seed = 0;
    std::string counts = "lorenz=105,logistic=105,white=106,pink=105";
    long length = 30000;
};

int cmd_generate(const GenerateArgs& a)
{
    CorpusSpec spec;
    spec.counts = parse_counts(a.counts);
    spec.length = a.length;
    const DatasetManifest m = gen_dataset(a.out, spec, a.seed);
    std::printf("wrote %zu series to %s\n", m.entries.size(), a.out.string().c_str());
    return 0;
}

// --- ingest ----------------------------------------------------------------

struct IngestArgs {
    fs::path in, out;
    std::string format = "plain";
    double dt = 0.1;
    std::string normalization = "none";
};

int cmd_ingest(const IngestArgs& a)
{
    const RawSamples raw = load_series(a.in, format_from_string(a.format));
    TimeSeries s;
    if (raw.timestamps) {
        s = resample(raw, a.dt);
    } else {
        s.values = raw.counts;
        s.dt = a.dt;
    }
    s.id = a.in.stem().string();
    if (a.normalization != "none") s = scale_unit(s, scaling_from_string(a.normalization));
    write_series(s, a.out);
    std::printf("samples=%lld interpolated=%zu\n", static_cast<long long>(s.size()), s.interpolated_samples);
    return 0;
}

// --- windows ---------------------------------------------------------------

struct WindowsArgs {
    fs::path in;
    int n = 10;
    int m = 10;
    bool dump = false;
};

int cmd_windows(const WindowsArgs& a)
{
    const TimeSeries s = read_series(a.in);
    const std::vector<Window> ws = make_windows(s, a.n);
    std::printf("windows=%zu n=%d m=%d\n", ws.size(), a.n, a.m);
    if (!a.dump) return 0;
    for (const Window& w : ws) {
        const SpectralWindow f = dft_magnitude(w, a.m);
        std::printf("%lld", static_cast<long long>(w.t));
        for (double v : w.values) std::printf(" %.9g", v);
        std::printf(" |");
        for (double v : f.magnitudes) std::printf(" %.9g", v);
        std::printf("\n");
    }
    return 0;
}

// --- train-ae --------------------------------------------------------------

struct TrainAeArgs {
    fs::path data, out;
    std::string domain;
    TrainConfig tc;
    int n = 10;
    int m = 10;
    int per_kind = 0;
    std::string normalization = "rank";
};

int cmd_train_ae(const TrainAeArgs& a)
{
    const DatasetManifest manifest = read_manifest(a.data / "manifest.json");
    const std::vector<Matrix> segments = training_segments(manifest, a.data, domain_from_string(a.domain), a.n, a.m,
                                                           scaling_from_string(a.normalization), a.per_kind);
    const TrainResult r = train(segments, a.tc);
    save_params(r.params, a.out);
    std::printf("epochs=%zu first_loss=%.6f final_loss=%.6f\n", r.epoch_loss.size(), r.epoch_loss.front(),
                r.epoch_loss.back());
    return 0;
}

// --- rasterize -------------------------------------------------------------

struct RasterizeArgs {
    fs::path series, data, ae_td, ae_fd, out;
    int r = kDefaultResolution;
    int n = 10;
    int m = 10;
    std::string normalization = "rank";
};

int cmd_rasterize(const RasterizeArgs& a)
{
    const Autoencoder td = load_params(a.ae_td);
    const Autoencoder fd = load_params(a.ae_fd);
    const Scaling scaling = scaling_from_string(a.normalization);
    if (!a.data.empty()) {
        const DatasetManifest m = read_manifest(a.data / "manifest.json");
        const DatasetManifest images = rasterize_corpus(m, a.data, td, fd, a.out, a.n, a.m, a.r, scaling);
        std::printf("wrote %zu images to %s\n", images.entries.size(), a.out.string().c_str());
        return 0;
    }
    if (a.series.empty()) throw ValidationError("rasterize needs --series or --data");
    const LssImage img = series_to_image(td, fd, read_series(a.series), a.n, a.m, a.r, scaling);
    write_image(img, a.out);
    std::printf("set_cells=%lld occupancy=%.6f\n", static_cast<long long>(img.set_cells()), img.occupancy());
    return 0;
}

// --- train-clf / evaluate --------------------------------------------------

struct TrainClfArgs {
    fs::path images, manifest, out;
    ClassifierConfig cc;
};

fs::path manifest_or_default(const fs::path& manifest, const fs::path& dir)
{
    return manifest.empty() ? dir / "manifest.json" : manifest;
}

int cmd_train_clf(const TrainClfArgs& a)
{
    const DatasetManifest m = read_manifest(manifest_or_default(a.manifest, a.images));
    const TrainedClassifier t = train_classifier(load_labeled_images(m, a.images), a.cc);
    save_model(t.model, a.out);
    std::printf("final_loss=%.6f train_accuracy=%.6f heldout_accuracy=%.6f heldout=%zu\n", t.metrics.epoch_loss.back(),
                t.metrics.train_accuracy, t.metrics.heldout_accuracy, t.metrics.heldout_ids.size());
    return 0;
}

struct EvaluateArgs {
    fs::path model, images, manifest, out;
};

int cmd_evaluate(const EvaluateArgs& a)
{
    const CnnModel model = load_model(a.model);
    const DatasetManifest m = read_manifest(manifest_or_default(a.manifest, a.images));
    const EvaluationReport report = evaluate(model, load_labeled_images(m, a.images));
    write_report_csv(report, a.out);
    std::printf("rows=%zu accuracy=%.6f\n", report.rows.size(), report.accuracy);
    return 0;
}

// --- classify --------------------------------------------------------------

struct ClassifyArgs {
    fs::path model, image, series, ae_td, ae_fd, cam;
    std::string normalization = "rank";
    bool resize = false;
};

int cmd_classify(const ClassifyArgs& a)
{
    if (a.image.empty() == a.series.empty()) throw ValidationError("classify needs exactly one of --image or --series");
    if (!a.image.empty()) {
        const CnnModel model = load_model(a.model);
        ForwardOptions fo;
        fo.allow_resize = a.resize;
        const Prediction p = predict(model, read_image(a.image), fo);
        print_prediction(p);
        if (!a.cam.empty()) {
            LssImage img = read_image(a.image);
            if (img.resolution() != model.arch.input_size) {
                const Matrix input = image_input(img, model.arch.input_size);
                write_cam(cam_input(model, input, p.label), a.cam);
            } else {
                write_cam(cam(model, img, p.label), a.cam);
            }
        }
        return 0;
    }
    if (a.ae_td.empty() || a.ae_fd.empty()) throw ValidationError("--series needs --ae-td and --ae-fd");
    ClassifyOptions opts;
    opts.scaling = scaling_from_string(a.normalization);
    opts.with_cam = !a.cam.empty();
    const ClassifyResult r = classify_one(a.series, a.ae_td, a.ae_fd, a.model, opts);
    print_prediction(r.prediction);
    if (r.cam) write_cam(*r.cam, a.cam);
    return 0;
}

// --- ci --------------------------------------------------------------------

struct CiArgs {
    fs::path series;
    int ed_max = 8;
    CiOptions opts;
};

int cmd_ci(const CiArgs& a)
{
    const TimeSeries s = read_series(a.series);
    const CiCurve c = correlation_dimension(s.values, a.ed_max, a.opts);
    std::printf("ed,cd\n");
    for (std::size_t i = 0; i < c.ed_values.size(); ++i) std::printf("%d,%.6f\n", c.ed_values[i], c.cd_values[i]);
    if (c.cd_saturated)
        std::printf("saturation=yes cd=%.6f\n", *c.cd_saturated);
    else
        std::printf("saturation=no\n");
    std::printf("label=%s\n", short_name(ci_label(c)).c_str());
    return 0;
}

// --- run -------------------------------------------------------------------

struct RunArgs {
    fs::path config;
    fs::path workspace;
    std::uint64_t seed = 0;
    bool desk = false;
    int ae_epochs = 0;
    int clf_epochs = 0;
    std::string normalization;
};

int cmd_run(const RunArgs& a, const CLI::App& sub)
{
    PipelineConfig c = a.desk ? PipelineConfig::desk_scale() : PipelineConfig{};
    if (!a.config.empty()) c = load_config(a.config);
    if (sub.count("--workspace")) c.workspace = a.workspace;
    if (sub.count("--seed")) c.seed = a.seed;
    if (a.ae_epochs > 0) c.autoencoder.epochs = a.ae_epochs;
    if (a.clf_epochs > 0) c.classifier.epochs = a.clf_epochs;
    if (!a.normalization.empty()) c.normalization = scaling_from_string(a.normalization);
    const PipelineResult r = run_pipeline(c);
    std::printf("heldout=%zu accuracy=%.6f report=%s\n", r.report.rows.size(), r.report.accuracy,
                r.artifacts.report_csv.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Latent-space signature pipeline for stochastic vs. non-stochastic time series"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* g = app.add_subcommand("generate", "Write a synthetic corpus and its manifest");
    g->add_option("--out", gen.out, "Output directory")->required();
    g->add_option("--seed", gen.seed, "Master seed")->required();
    g->add_option("--counts", gen.counts, "Series per kind")->capture_default_str();
    g->add_option("--length", gen.length, "Samples per series")->capture_default_str()->check(CLI::PositiveNumber);

    IngestArgs ing;
    auto* in = app.add_subcommand("ingest", "Convert a lightcurve to the one-value-per-line format");
    in->add_option("--in", ing.in, "Input file")->required();
    in->add_option("--out", ing.out, "Output series file")->required();
    in->add_option("--format", ing.format, "plain or tv (time value)")->capture_default_str();
    in->add_option("--dt", ing.dt, "Resampling step")->capture_default_str();
    in->add_option("--normalize", ing.normalization, "none, minmax or rank")->capture_default_str();

    WindowsArgs win;
    auto* w = app.add_subcommand("windows", "Inspect sliding windows and their DFT moduli");
    w->add_option("--in", win.in, "Series file")->required();
    w->add_option("--n", win.n, "Window length")->capture_default_str();
    w->add_option("--m", win.m, "Crop length")->capture_default_str();
    w->add_flag("--dump", win.dump, "Print every window/spectrum pair");

    TrainAeArgs tae;
    auto* ta = app.add_subcommand("train-ae", "Train one autoencoder on a corpus");
    ta->add_option("--data", tae.data, "Corpus directory with manifest.json")->required();
    ta->add_option("--domain", tae.domain, "td or fd")->required();
    ta->add_option("--out", tae.out, "Output weights file")->required();
    ta->add_option("--epochs", tae.tc.epochs)->capture_default_str();
    ta->add_option("--lr", tae.tc.learning_rate)->capture_default_str();
    ta->add_option("--batch", tae.tc.minibatch_size)->capture_default_str();
    ta->add_option("--k", tae.tc.k)->capture_default_str();
    ta->add_option("--seed", tae.tc.seed)->capture_default_str();
    ta->add_option("--n", tae.n, "Window length")->capture_default_str();
    ta->add_option("--m", tae.m, "Crop length")->capture_default_str();
    ta->add_option("--per-kind", tae.per_kind, "Series per kind (0 = all)")->capture_default_str();
    ta->add_option("--normalize", tae.normalization, "minmax or rank")->capture_default_str();

    RasterizeArgs ras;
    auto* ra = app.add_subcommand("rasterize", "Render LSS images");
    ra->add_option("--series", ras.series, "Single series file");
    ra->add_option("--data", ras.data, "Corpus directory (writes one image per entry)");
    ra->add_option("--ae-td", ras.ae_td)->required();
    ra->add_option("--ae-fd", ras.ae_fd)->required();
    ra->add_option("--r", ras.r, "Resolution")->capture_default_str();
    ra->add_option("--out", ras.out, "Output image, or directory with --data")->required();
    ra->add_option("--n", ras.n)->capture_default_str();
    ra->add_option("--m", ras.m)->capture_default_str();
    ra->add_option("--normalize", ras.normalization, "minmax or rank")->capture_default_str();

    TrainClfArgs tcl;
    auto* tc = app.add_subcommand("train-clf", "Train the CNN on labelled LSS images");
    tc->add_option("--images", tcl.images, "Image directory")->required();
    tc->add_option("--manifest", tcl.manifest, "Image manifest (default DIR/manifest.json)");
    tc->add_option("--out", tcl.out, "Output model file")->required();
    tc->add_option("--lr", tcl.cc.learning_rate)->capture_default_str();
    tc->add_option("--momentum", tcl.cc.momentum, "0 for plain SGD")->capture_default_str();
    tc->add_option("--epochs", tcl.cc.epochs)->capture_default_str();
    tc->add_option("--batch", tcl.cc.batch)->capture_default_str();
    tc->add_option("--seed", tcl.cc.seed)->capture_default_str();
    tc->add_option("--val", tcl.cc.val_fraction, "Held-out fraction")->capture_default_str();

    ClassifyArgs cla;
    auto* cl = app.add_subcommand("classify", "Label one image or series");
    cl->add_option("--model", cla.model)->required();
    cl->add_option("--image", cla.image, "LSS image (PGM)");
    cl->add_option("--series", cla.series, "Raw series (needs --ae-td/--ae-fd)");
    cl->add_option("--ae-td", cla.ae_td);
    cl->add_option("--ae-fd", cla.ae_fd);
    cl->add_option("--cam", cla.cam, "Write the CAM as PGM, plus a .csv beside it");
    cl->add_option("--normalize", cla.normalization, "minmax or rank")->capture_default_str();
    cl->add_flag("--resize", cla.resize, "Allow nearest-neighbour resizing to the model input");

    CiArgs cia;
    auto* ci = app.add_subcommand("ci", "Correlation-dimension baseline");
    ci->add_option("--series", cia.series)->required();
    ci->add_option("--ed-max", cia.ed_max)->capture_default_str();
    ci->add_option("--tau", cia.opts.tau)->capture_default_str();
    ci->add_option("--theiler", cia.opts.theiler_window)->capture_default_str();
    ci->add_option("--max-points", cia.opts.max_points)->capture_default_str();
    ci->add_option("--seed", cia.opts.seed)->capture_default_str();

    EvaluateArgs eva;
    auto* ev = app.add_subcommand("evaluate", "Score a model on labelled images and write the report CSV");
    ev->add_option("--model", eva.model)->required();
    ev->add_option("--images", eva.images)->required();
    ev->add_option("--manifest", eva.manifest);
    ev->add_option("--out", eva.out)->required();

    RunArgs run;
    auto* rn = app.add_subcommand("run", "Whole pipeline from a JSON config; flags override it");
    rn->add_option("--config", run.config, "JSON config file");
    rn->add_option("--workspace", run.workspace);
    rn->add_option("--seed", run.seed);
    rn->add_flag("--desk", run.desk, "Desk-scale defaults (ignored with --config)");
    rn->add_option("--ae-epochs", run.ae_epochs);
    rn->add_option("--clf-epochs", run.clf_epochs);
    rn->add_option("--normalize", run.normalization, "minmax or rank");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*g) return cmd_generate(gen);
        if (*in) return cmd_ingest(ing);
        if (*w) return cmd_windows(win);
        if (*ta) return cmd_train_ae(tae);
        if (*ra) return cmd_rasterize(ras);
        if (*tc) return cmd_train_clf(tcl);
        if (*cl) return cmd_classify(cla);
        if (*ci) return cmd_ci(cia);
        if (*ev) return cmd_evaluate(eva);
        if (*rn) return cmd_run(run, *rn);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
