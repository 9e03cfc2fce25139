#include "lss/pipeline.hpp"

#include "lss/ingest.hpp"
#include "lss/series_io.hpp"
#include "lss/windowing.hpp"

#include <cstdio>
#include <fstream>
#include <functional>

namespace lss {

namespace fs = std::filesystem;
using nlohmann::json;

PipelineConfig PipelineConfig::desk_scale()
{
    PipelineConfig c;
    c.series_length = 5000;
    c.counts = {{SeriesKind::Lorenz, 25}, {SeriesKind::Logistic, 25}, {SeriesKind::White, 25}, {SeriesKind::Pink, 25}};
    return c;
}

json to_json(const PipelineConfig& c)
{
    json counts = json::object();
    for (const auto& [kind, n] : c.counts) counts[to_string(kind)] = n;
    return {{"workspace", c.workspace.string()},
            {"seed", c.seed},
            {"series_length", c.series_length},
            {"counts", counts},
            {"window", c.window},
            {"crop", c.crop},
            {"k", c.k},
            {"latent_dim", c.latent_dim},
            {"resolution", c.resolution},
            {"normalization", to_string(c.normalization)},
            {"autoencoder",
             {{"epochs", c.autoencoder.epochs},
              {"learning_rate", c.autoencoder.learning_rate},
              {"minibatch", c.autoencoder.minibatch},
              {"series_per_kind", c.autoencoder.series_per_kind}}},
            {"classifier",
             {{"epochs", c.classifier.epochs},
              {"learning_rate", c.classifier.learning_rate},
              {"momentum", c.classifier.momentum},
              {"batch", c.classifier.batch},
              {"val_fraction", c.classifier.val_fraction}}}};
}

PipelineConfig config_from_json(const json& doc)
{
    PipelineConfig c;
    try {
        c.workspace = doc.value("workspace", c.workspace.string());
        c.seed = doc.value("seed", c.seed);
        c.series_length = doc.value("series_length", c.series_length);
        if (doc.contains("counts")) {
            for (auto& [kind, n] : c.counts) n = 0;
            for (const auto& [key, value] : doc.at("counts").items()) c.counts[kind_from_string(key)] = value.get<long>();
        }
        c.window = doc.value("window", c.window);
        c.crop = doc.value("crop", c.crop);
        c.k = doc.value("k", c.k);
        c.latent_dim = doc.value("latent_dim", c.latent_dim);
        c.resolution = doc.value("resolution", c.resolution);
        if (doc.contains("normalization")) c.normalization = scaling_from_string(doc.at("normalization").get<std::string>());
        if (doc.contains("autoencoder")) {
            const json& ae = doc.at("autoencoder");
            c.autoencoder.epochs = ae.value("epochs", c.autoencoder.epochs);
            c.autoencoder.learning_rate = ae.value("learning_rate", c.autoencoder.learning_rate);
            c.autoencoder.minibatch = ae.value("minibatch", c.autoencoder.minibatch);
            c.autoencoder.series_per_kind = ae.value("series_per_kind", c.autoencoder.series_per_kind);
        }
        if (doc.contains("classifier")) {
            const json& clf = doc.at("classifier");
            c.classifier.epochs = clf.value("epochs", c.classifier.epochs);
            c.classifier.learning_rate = clf.value("learning_rate", c.classifier.learning_rate);
            c.classifier.momentum = clf.value("momentum", c.classifier.momentum);
            c.classifier.batch = clf.value("batch", c.classifier.batch);
            c.classifier.val_fraction = clf.value("val_fraction", c.classifier.val_fraction);
        }
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("bad pipeline config: ") + ex.what());
    }
    if (c.window < 1 || c.crop < 1 || c.crop > c.window) throw ValidationError("config needs 1 <= crop <= window");
    if (c.k < 1 || c.latent_dim < 1 || c.resolution < 2) throw ValidationError("config has invalid k/latent_dim/resolution");
    return c;
}

PipelineConfig load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& ex) {
        throw ValidationError("malformed config " + path.string() + ": " + ex.what());
    }
    return config_from_json(doc);
}

PipelineArtifacts artifact_paths(const fs::path& workspace)
{
    return {workspace / "series",         workspace / "models" / "ae_td.ae", workspace / "models" / "ae_fd.ae",
            workspace / "images",         workspace / "models" / "classifier.cnn", workspace / "report.csv",
            workspace / "summary.json"};
}

Matrix domain_features(const TimeSeries& normalized, Domain domain, int n, int m)
{
    const Matrix windows = window_matrix(normalized.values, n);
    return domain == Domain::Time ? windows : frequency_features(windows, m);
}

std::vector<Matrix> training_segments(const DatasetManifest& manifest, const fs::path& series_dir, Domain domain,
                                      int n, int m, Scaling scaling, int series_per_kind)
{
    std::map<std::string, int> taken;
    std::vector<Matrix> segments;
    for (const auto& e : manifest.entries) {
        const std::string group = e.kind ? to_string(*e.kind) : to_string(e.label);
        if (series_per_kind > 0 && taken[group] >= series_per_kind) continue;
        ++taken[group];
        const TimeSeries s = scale_unit(read_series(series_dir / e.path), scaling);
        segments.push_back(domain_features(s, domain, n, m));
    }
    if (segments.empty()) throw ValidationError("no series available for autoencoder training");
    return segments;
}

LssImage series_to_image(const Autoencoder& ae_td, const Autoencoder& ae_fd, const TimeSeries& series, int n, int m,
                         int resolution, Scaling scaling)
{
    return rasterize(latent_trace(ae_td, ae_fd, scale_unit(series, scaling), n, m), resolution);
}

DatasetManifest rasterize_corpus(const DatasetManifest& manifest, const fs::path& series_dir,
                                 const Autoencoder& ae_td, const Autoencoder& ae_fd, const fs::path& images_dir,
                                 int n, int m, int resolution, Scaling scaling)
{
    fs::create_directories(images_dir);
    DatasetManifest out;
    for (const auto& e : manifest.entries) {
        TimeSeries s = read_series(series_dir / e.path);
        s.id = e.id;
        const LssImage img = series_to_image(ae_td, ae_fd, s, n, m, resolution, scaling);
        ManifestEntry entry = e;
        entry.path = e.id + ".pgm";
        write_image(img, images_dir / entry.path);
        out.entries.push_back(std::move(entry));
    }
    write_manifest(out, images_dir / "manifest.json");
    return out;
}

std::vector<LabeledImage> load_labeled_images(const DatasetManifest& manifest, const fs::path& dir)
{
    std::vector<LabeledImage> items;
    for (const auto& e : manifest.entries) items.push_back({e.id, read_image(dir / e.path), e.label});
    return items;
}

namespace {

template <typename F>
auto run_stage(const std::string& name, F&& body) -> decltype(body())
{
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const Error& ex) {
        throw StageError(name, ex);
    } catch (const fs::filesystem_error& ex) {
        throw StageError(name, IoError(ex.what()));
    }
}

json summary_json(const PipelineConfig& config, const PipelineResult& result, const TrainResult& td,
                  const TrainResult& fd)
{
    json per_class = json::object();
    for (const Label label : {Label::Stochastic, Label::NonStochastic}) {
        int count = 0;
        int correct = 0;
        for (const auto& r : result.report.rows) {
            if (r.reference_label != label) continue;
            ++count;
            correct += r.agree ? 1 : 0;
        }
        per_class[to_string(label)] = {{"count", count}, {"correct", correct}};
    }
    json rows = json::array();
    for (const auto& r : result.report.rows) {
        rows.push_back({{"id", r.id},
                        {"c_s", r.c_s},
                        {"c_ns", r.c_ns},
                        {"lss_label", short_name(r.lss_label)},
                        {"reference_label", short_name(r.reference_label)},
                        {"agree", r.agree}});
    }
    return {{"accuracy", result.report.accuracy},
            {"train_accuracy", result.metrics.train_accuracy},
            {"per_class", per_class},
            {"rows", rows},
            {"autoencoder_final_loss", {{"td", td.epoch_loss.back()}, {"fd", fd.epoch_loss.back()}}},
            {"classifier_final_loss", result.metrics.epoch_loss.back()},
            {"config", to_json(config)}};
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config)
{
    PipelineResult result;
    result.artifacts = artifact_paths(config.workspace);
    const PipelineArtifacts& paths = result.artifacts;

    const DatasetManifest manifest = run_stage("generate", [&] {
        CorpusSpec spec;
        spec.counts = config.counts;
        spec.length = config.series_length;
        return gen_dataset(paths.series_dir, spec, config.seed);
    });

    const auto train_domain = [&](Domain domain, const fs::path& out, std::uint64_t stream) {
        const std::string name = domain == Domain::Time ? "train-ae-td" : "train-ae-fd";
        return run_stage(name, [&] {
            const std::vector<Matrix> segments =
                training_segments(manifest, paths.series_dir, domain, config.window, config.crop, config.normalization,
                                  config.autoencoder.series_per_kind);
            TrainConfig tc;
            tc.learning_rate = config.autoencoder.learning_rate;
            tc.epochs = config.autoencoder.epochs;
            tc.minibatch_size = config.autoencoder.minibatch;
            tc.k = config.k;
            tc.latent_dim = config.latent_dim;
            tc.seed = mix_seed(config.seed, stream);
            TrainResult trained = train(segments, tc);
            fs::create_directories(out.parent_path());
            save_params(trained.params, out);
            return trained;
        });
    };
    const TrainResult td = train_domain(Domain::Time, paths.ae_td, 101);
    const TrainResult fd = train_domain(Domain::Frequency, paths.ae_fd, 102);

    const DatasetManifest images = run_stage("rasterize", [&] {
        return rasterize_corpus(manifest, paths.series_dir, td.params, fd.params, paths.images_dir, config.window,
                                config.crop, config.resolution, config.normalization);
    });

    const std::vector<LabeledImage> items =
        run_stage("load-images", [&] { return load_labeled_images(images, paths.images_dir); });

    const TrainedClassifier clf = run_stage("train-clf", [&] {
        ClassifierConfig cc;
        cc.learning_rate = config.classifier.learning_rate;
        cc.momentum = config.classifier.momentum;
        cc.epochs = config.classifier.epochs;
        cc.batch = config.classifier.batch;
        cc.val_fraction = config.classifier.val_fraction;
        cc.seed = mix_seed(config.seed, 103);
        cc.arch.input_size = config.resolution;
        TrainedClassifier trained = train_classifier(items, cc);
        save_model(trained.model, paths.model);
        return trained;
    });
    result.metrics = clf.metrics;

    run_stage("evaluate", [&] {
        const std::vector<std::string>& ids =
            clf.metrics.heldout_ids.empty() ? clf.metrics.train_ids : clf.metrics.heldout_ids;
        std::vector<LabeledImage> heldout;
        for (const auto& it : items)
            if (std::find(ids.begin(), ids.end(), it.id) != ids.end()) heldout.push_back(it);
        result.report = evaluate(clf.model, heldout);
        write_report_csv(result.report, paths.report_csv);
        std::ofstream out(paths.summary_json);
        if (!out) throw IoError("cannot write " + paths.summary_json.string());
        out << summary_json(config, result, td, fd).dump(2) << '\n';
        return 0;
    });
    return result;
}

ClassifyResult classify_series(const TimeSeries& series, const Autoencoder& ae_td, const Autoencoder& ae_fd,
                               const CnnModel& model, const ClassifyOptions& opts)
{
    const TimeSeries normalized = run_stage("normalize", [&] { return scale_unit(series, opts.scaling); });
    const LatentTrace trace =
        run_stage("trace", [&] { return latent_trace(ae_td, ae_fd, normalized, opts.n, opts.m); });
    ClassifyResult out;
    out.image = run_stage("rasterize", [&] { return rasterize(trace, model.arch.input_size); });
    out.prediction = run_stage("predict", [&] { return predict(model, out.image); });
    if (opts.with_cam) out.cam = run_stage("cam", [&] { return cam(model, out.image, out.prediction.label); });
    return out;
}

ClassifyResult classify_one(const fs::path& series_path, const fs::path& ae_td_path, const fs::path& ae_fd_path,
                            const fs::path& model_path, const ClassifyOptions& opts)
{
    const TimeSeries series = run_stage("ingest", [&] { return read_series(series_path); });
    const Autoencoder td = run_stage("load-models", [&] { return load_params(ae_td_path); });
    const Autoencoder fd = run_stage("load-models", [&] { return load_params(ae_fd_path); });
    const CnnModel model = run_stage("load-models", [&] { return load_model(model_path); });
    return classify_series(series, td, fd, model, opts);
}

void write_cam_csv(const Matrix& heat, const fs::path& path)
{
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    char buf[40];
    for (Eigen::Index r = 0; r < heat.rows(); ++r) {
        for (Eigen::Index c = 0; c < heat.cols(); ++c) {
            std::snprintf(buf, sizeof buf, "%.9g", heat(r, c));
            out << (c ? "," : "") << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace lss
