#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "occ/camera.hpp"
#include "occ/depth_bins.hpp"
#include "occ/errors.hpp"
#include "occ/io.hpp"
#include "occ/labelgen.hpp"
#include "occ/lifting.hpp"
#include "occ/metrics.hpp"
#include "occ/parallel.hpp"
#include "occ/voxel.hpp"

namespace fs = std::filesystem;
using namespace occ;

namespace {

// Problems the user can fix on the command line (exit 1), as opposed to
// defective data met while processing (exit 2).
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest text that still round-trips a double.
std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int checked_extent(std::uint64_t e, const char* what) {
    if (e > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
        throw format_error(std::string(what) + " extent does not fit an int");
    }
    return static_cast<int>(e);
}

// ---------------------------------------------------------------- depth-bins

struct DepthBinsOpts {
    double d_min = 0.0;
    double d_max = 0.0;
    int bins = 0;
    std::string depth_map;
    std::string out;
    std::string mask_out;
};

int run_depth_bins(const DepthBinsOpts& o) {
    const DepthBinSpec spec = [&] {
        try {
            return DepthBinSpec(o.d_min, o.d_max, o.bins);
        } catch (const std::exception& e) {
            throw config_error(e.what());
        }
    }();

    std::cout << "delta=" << fmt_g(spec.delta) << "\n";
    std::cout << "edges=";
    const auto edges = bin_edges(spec);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        std::cout << (i ? "," : "") << fmt_g(edges[i]);
    }
    std::cout << "\n";

    if (!o.depth_map.empty()) {
        const DepthMap depth = DepthMap::from_tensor(read_tensor_file(o.depth_map));
        const OneHotTarget target = one_hot_target(depth, spec);
        write_tensor_file(target.dist.to_tensor(), o.out);
        if (!o.mask_out.empty()) {
            write_tensor_file(
                DenseTensor::from_u8({static_cast<std::uint64_t>(depth.height()),
                                      static_cast<std::uint64_t>(depth.width())},
                                     target.mask),
                o.mask_out);
        }
        std::uint64_t valid = 0;
        for (auto m : target.mask) valid += m;
        std::cout << "valid=" << valid << " total=" << target.mask.size() << "\n";
    }
    return 0;
}

// ---------------------------------------------------------------------- lift

struct LiftOpts {
    std::string camera;
    std::string dist;
    std::string out;
    std::map<int, std::string> feat;  // scale -> tensor path
    double d_min = 0.0;
    double d_max = 0.0;
    std::string mode = "bilinear";
    std::vector<std::int64_t> dims{60, 36, 60};
    std::vector<double> origin{0.0, 0.0, 0.0};
    double voxel_size = 0.08;
    int threads = 0;
};

FeatureLevel load_feature_level(int scale, const fs::path& path) {
    const DenseTensor t = read_tensor_file(path);
    if (t.rank() != 3 || t.dtype() != Dtype::f32) {
        throw format_error("feature tensor " + path.string() +
                           " must be rank-3 f32 (channel, row, col)");
    }
    const auto& d = t.dims();
    const auto values = t.as_f32();
    return FeatureLevel{scale, checked_extent(d[0], "channel"), checked_extent(d[1], "row"),
                        checked_extent(d[2], "col"),
                        std::vector<float>(values.begin(), values.end())};
}

int run_lift(const LiftOpts& o) {
    if (o.feat.empty()) {
        throw config_error("at least one of --feat1/--feat2/--feat4/--feat8 is required");
    }
    const auto t0 = std::chrono::steady_clock::now();

    const CameraModel cam = read_camera_file(o.camera);
    const DepthDistribution dist1 = DepthDistribution::from_tensor(read_tensor_file(o.dist));

    const DepthBinSpec bins = [&] {
        try {
            return DepthBinSpec(o.d_min, o.d_max, dist1.n_bins());
        } catch (const std::exception& e) {
            throw config_error(e.what());
        }
    }();
    const GridSpec spec = [&] {
        try {
            return GridSpec({o.dims[0], o.dims[1], o.dims[2]},
                            {o.origin[0], o.origin[1], o.origin[2]}, o.voxel_size);
        } catch (const std::exception& e) {
            throw config_error(e.what());
        }
    }();

    FeaturePyramid pyramid(dist1.height(), dist1.width());
    for (const auto& [scale, path] : o.feat) {
        pyramid.add_level(load_feature_level(scale, path));
    }
    // distributions at coarser scales are average-pooled from the full one
    std::map<int, DepthDistribution> dists;
    for (int scale : pyramid.scales()) {
        dists.emplace(scale, scale == 1 ? dist1 : downsample_distribution(dist1, scale));
    }

    const SampleMode mode = o.mode == "nearest" ? SampleMode::nearest : SampleMode::bilinear;
    const int threads = resolve_threads(o.threads);
    const VoxelProjection proj = project_voxels(cam, spec);
    const VoxelFeatureVolume vol = fuse(pyramid, dists, proj, bins, mode, threads);
    write_tensor_file(vol.to_tensor(), o.out);

    const auto elapsed =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0);
    std::cout << "voxels=" << spec.voxel_count() << " valid_fraction=";
    std::printf("%.4f", proj.valid_fraction());
    std::cout << " channels=" << vol.channels << " threads=" << threads
              << " elapsed_ms=" << elapsed.count() << "\n";
    return 0;
}

// ---------------------------------------------------------------- gen-labels

struct GenLabelsOpts {
    std::string scene;
    std::string out;
    std::string scene_id;
    std::uint64_t seed = 0;
    int frames = 100;
    double train_ratio = 0.7;
    std::vector<std::int64_t> dims{60, 60, 36};
    double voxel_size = 0.08;
    double floor_height = 0.0;
    double max_dist = 0.0;
    double source_voxel_size = 0.0;
};

int run_gen_labels(const GenLabelsOpts& o) {
    const fs::path scene(o.scene);
    const fs::path out(o.out);
    const fs::path points_path = scene / "points.occt";
    const fs::path bounds_path = scene / "bounds.json";
    const fs::path cameras_dir = scene / "cameras";
    for (const fs::path& p : {points_path, bounds_path, cameras_dir}) {
        if (!fs::exists(p)) throw config_error("scene is missing " + p.string());
    }
    if (o.frames < 1) throw config_error("--frames must be positive");
    if (!(o.train_ratio >= 0.0 && o.train_ratio <= 1.0)) {
        throw config_error("--train-ratio must lie in [0, 1]");
    }

    LabelGenConfig config;
    config.dims = {o.dims[0], o.dims[1], o.dims[2]};
    config.voxel_size = o.voxel_size;
    config.floor_height = o.floor_height;
    config.max_dist = o.max_dist;
    try {
        GridSpec probe(config.dims, {0, 0, 0}, config.voxel_size);  // flag sanity only
        (void)probe;
    } catch (const std::exception& e) {
        throw config_error(e.what());
    }

    const Aabb bounds = read_bounds_file(bounds_path);
    const LabeledPointSet points =
        point_set_from_tensor(read_tensor_file(points_path), o.source_voxel_size);

    std::vector<std::string> ids;
    std::map<std::string, fs::path> camera_files;
    for (const auto& entry : fs::directory_iterator(cameras_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        const std::string id = entry.path().stem().string();
        ids.push_back(id);
        camera_files[id] = entry.path();
    }
    if (ids.empty()) throw config_error("no camera documents under " + cameras_dir.string());
    std::sort(ids.begin(), ids.end());

    const std::vector<std::string> selected = sample_frames(ids, o.frames, o.seed);
    const auto [train, val] = split_frames(selected, o.train_ratio, o.seed);
    const std::set<std::string> train_set(train.begin(), train.end());

    fs::create_directories(out / "labels");

    DatasetManifest manifest;
    manifest.scene_id =
        o.scene_id.empty() ? fs::weakly_canonical(scene).filename().string() : o.scene_id;
    manifest.seed = o.seed;

    std::uint64_t kept = 0;
    for (const std::string& id : selected) {
        const fs::path cam_path = camera_files.at(id);
        const Split split = train_set.count(id) ? Split::train : Split::val;

        FrameEntry entry;
        entry.frame_id = id;
        entry.camera_file =
            fs::proximate(fs::absolute(cam_path), fs::absolute(out)).generic_string();
        entry.split = split;

        FrameDecision decision = FrameDecision::rejected(RejectReason::invalid_pose);
        std::optional<LabelGrid> grid;
        try {
            const CameraModel cam = read_camera_file(cam_path);
            FrameLabelResult result = generate_frame_label(cam, points, bounds, config);
            decision = result.decision;
            grid = std::move(result.grid);
        } catch (const std::exception& e) {
            // an unreadable or degenerate pose rejects the frame, it does not
            // abort the scene
            std::cerr << "frame " << id << ": " << e.what() << "\n";
        }
        if (grid) {
            const std::string rel = "labels/" + id + ".occt";
            write_tensor_file(label_grid_to_tensor(*grid), out / rel);
            entry.label_file = rel;
            ++kept;
        }
        entry.verdict = to_string(decision.verdict);
        entry.reason = to_string(decision.reason);
        std::cout << "frame=" << id << " verdict=" << entry.verdict << " reason=" << entry.reason
                  << " split=" << to_string(split) << "\n";
        manifest.frames.push_back(std::move(entry));
    }

    write_manifest_file(manifest, out / "manifest.json");
    std::cout << "selected=" << selected.size() << " kept=" << kept
              << " rejected=" << selected.size() - kept << " train=" << train.size()
              << " val=" << val.size() << "\n";
    return 0;
}

// ---------------------------------------------------------------------- eval

struct EvalOpts {
    std::string pred;
    std::string gt;
    std::string name = "pred";
    std::string csv;
};

int run_eval(const EvalOpts& o) {
    const fs::path pred_dir(o.pred);
    const fs::path gt_dir(o.gt);
    const auto collect = [](const fs::path& dir) {
        std::set<std::string> names;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".occt") {
                names.insert(entry.path().filename().string());
            }
        }
        return names;
    };
    const std::set<std::string> pred_files = collect(pred_dir);
    const std::set<std::string> gt_files = collect(gt_dir);

    ConfusionMatrix conf;
    std::uint64_t pairs = 0;
    for (const std::string& name : gt_files) {
        if (!pred_files.count(name)) {
            std::cerr << "warning: no prediction for " << name << ", skipping\n";
            continue;
        }
        const LabelGrid gt = label_grid_from_tensor(read_tensor_file(gt_dir / name));
        const LabelGrid pred = label_grid_from_tensor(read_tensor_file(pred_dir / name));
        conf.accumulate(pred, gt);
        ++pairs;
    }
    for (const std::string& name : pred_files) {
        if (!gt_files.count(name)) {
            std::cerr << "warning: no ground truth for " << name << ", skipping\n";
        }
    }
    if (pairs == 0) throw std::runtime_error("no prediction/ground-truth pairs to score");

    const std::vector<EvalRow> rows{{o.name, conf}};
    std::cout << render_report_text(rows);
    if (!o.csv.empty()) atomic_write_file(o.csv, render_report_csv(rows));
    return 0;
}

// ---------------------------------------------------------------- depth-loss

struct DepthLossOpts {
    std::string pred;
    std::string depth;
    std::string grad;
    double d_min = 0.0;
    double d_max = 0.0;
    int threads = 0;
};

int run_depth_loss(const DepthLossOpts& o) {
    const DepthDistribution pred = DepthDistribution::from_tensor(read_tensor_file(o.pred));
    const DepthMap depth = DepthMap::from_tensor(read_tensor_file(o.depth));
    const DepthBinSpec spec = [&] {
        try {
            return DepthBinSpec(o.d_min, o.d_max, pred.n_bins());
        } catch (const std::exception& e) {
            throw config_error(e.what());
        }
    }();

    const OneHotTarget target = one_hot_target(depth, spec);
    const int threads = resolve_threads(o.threads);
    const double loss = bce_depth_loss(pred, target.dist, target.mask, threads);
    std::printf("loss=%.6f\n", loss);

    if (!o.grad.empty()) {
        const std::vector<double> grad = bce_depth_loss_grad(pred, target.dist, target.mask,
                                                             threads);
        write_tensor_file(DenseTensor::from_f64({static_cast<std::uint64_t>(pred.n_bins()),
                                                 static_cast<std::uint64_t>(pred.height()),
                                                 static_cast<std::uint64_t>(pred.width())},
                                                grad),
                          o.grad);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic tools for camera-to-voxel occupancy pipelines"};
    app.require_subcommand(1);

    DepthBinsOpts db;
    CLI::App* db_cmd = app.add_subcommand(
        "depth-bins", "inspect a depth discretization or discretize a depth map");
    db_cmd->add_option("--d-min", db.d_min, "nearest representable depth")->required();
    db_cmd->add_option("--d-max", db.d_max, "farthest representable depth")->required();
    db_cmd->add_option("--bins", db.bins, "number of depth bins")->required();
    auto* db_map = db_cmd->add_option("--depth-map", db.depth_map,
                                      "rank-2 f32 depth tensor to discretize")
                       ->check(CLI::ExistingFile);
    auto* db_out =
        db_cmd->add_option("--out", db.out, "output tensor for the one-hot distribution");
    auto* db_mask = db_cmd->add_option("--mask-out", db.mask_out,
                                       "output tensor for the per-pixel validity mask");
    db_map->needs(db_out);
    db_out->needs(db_map);
    db_mask->needs(db_map);

    LiftOpts lo;
    std::string feat_paths[4];
    CLI::App* lift_cmd =
        app.add_subcommand("lift", "fuse image features into a voxel feature volume");
    lift_cmd->add_option("--camera", lo.camera, "camera document")->required()
        ->check(CLI::ExistingFile);
    lift_cmd->add_option("--dist", lo.dist, "full-resolution depth distribution tensor")
        ->required()
        ->check(CLI::ExistingFile);
    lift_cmd->add_option("--feat1", feat_paths[0], "feature tensor at full resolution")
        ->check(CLI::ExistingFile);
    lift_cmd->add_option("--feat2", feat_paths[1], "feature tensor at 1/2 resolution")
        ->check(CLI::ExistingFile);
    lift_cmd->add_option("--feat4", feat_paths[2], "feature tensor at 1/4 resolution")
        ->check(CLI::ExistingFile);
    lift_cmd->add_option("--feat8", feat_paths[3], "feature tensor at 1/8 resolution")
        ->check(CLI::ExistingFile);
    lift_cmd->add_option("--d-min", lo.d_min, "nearest representable depth")->required();
    lift_cmd->add_option("--d-max", lo.d_max, "farthest representable depth")->required();
    lift_cmd->add_option("--mode", lo.mode, "pixel sampling mode")
        ->check(CLI::IsMember({"nearest", "bilinear"}))
        ->capture_default_str();
    lift_cmd->add_option("--dims", lo.dims, "voxel grid extents")->expected(3)
        ->capture_default_str();
    lift_cmd->add_option("--origin", lo.origin, "grid minimum corner")->expected(3)
        ->capture_default_str();
    lift_cmd->add_option("--voxel-size", lo.voxel_size, "voxel edge length")
        ->capture_default_str();
    lift_cmd->add_option("--out", lo.out, "output volume tensor (x, y, z, channel)")->required();
    lift_cmd->add_option("--threads", lo.threads, "worker threads (0 = auto)");

    GenLabelsOpts gl;
    CLI::App* gen_cmd = app.add_subcommand(
        "gen-labels", "generate voxel label grids and a manifest for a scene");
    gen_cmd->add_option("--scene", gl.scene,
                        "scene directory holding points.occt, bounds.json, cameras/")
        ->required()
        ->check(CLI::ExistingDirectory);
    gen_cmd->add_option("--out", gl.out, "output directory")->required();
    gen_cmd->add_option("--scene-id", gl.scene_id, "manifest scene id (default: directory name)");
    gen_cmd->add_option("--seed", gl.seed, "seed for frame sampling and the split")
        ->capture_default_str();
    gen_cmd->add_option("--frames", gl.frames, "number of frames to select")
        ->capture_default_str();
    gen_cmd->add_option("--train-ratio", gl.train_ratio, "fraction of selected frames for train")
        ->capture_default_str();
    gen_cmd->add_option("--dims", gl.dims, "label grid extents")->expected(3)
        ->capture_default_str();
    gen_cmd->add_option("--voxel-size", gl.voxel_size, "label grid voxel edge length")
        ->capture_default_str();
    gen_cmd->add_option("--floor-height", gl.floor_height, "grid floor height")
        ->capture_default_str();
    gen_cmd->add_option("--max-dist", gl.max_dist,
                        "label transfer cutoff (default: source voxel diagonal)");
    gen_cmd->add_option("--source-voxel-size", gl.source_voxel_size,
                        "edge length of the voxels the scene points were sampled from")
        ->required();

    EvalOpts ev;
    CLI::App* eval_cmd =
        app.add_subcommand("eval", "score predicted label volumes against ground truth");
    eval_cmd->add_option("--pred", ev.pred, "directory of predicted volumes")->required()
        ->check(CLI::ExistingDirectory);
    eval_cmd->add_option("--gt", ev.gt, "directory of ground-truth volumes")->required()
        ->check(CLI::ExistingDirectory);
    eval_cmd->add_option("--name", ev.name, "row label in the report")->capture_default_str();
    eval_cmd->add_option("--csv", ev.csv, "also write the report as csv");

    DepthLossOpts dl;
    CLI::App* loss_cmd = app.add_subcommand(
        "depth-loss", "masked cross-entropy of a depth distribution against a depth map");
    loss_cmd->add_option("--pred", dl.pred, "predicted distribution tensor")->required()
        ->check(CLI::ExistingFile);
    loss_cmd->add_option("--depth", dl.depth, "rank-2 f32 depth tensor")->required()
        ->check(CLI::ExistingFile);
    loss_cmd->add_option("--d-min", dl.d_min, "nearest representable depth")->required();
    loss_cmd->add_option("--d-max", dl.d_max, "farthest representable depth")->required();
    loss_cmd->add_option("--grad", dl.grad, "also write the loss gradient (f64 tensor)");
    loss_cmd->add_option("--threads", dl.threads, "worker threads (0 = auto)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    for (int i = 0; i < 4; ++i) {
        if (!feat_paths[i].empty()) lo.feat[1 << i] = feat_paths[i];
    }

    try {
        if (db_cmd->parsed()) return run_depth_bins(db);
        if (lift_cmd->parsed()) return run_lift(lo);
        if (gen_cmd->parsed()) return run_gen_labels(gl);
        if (eval_cmd->parsed()) return run_eval(ev);
        if (loss_cmd->parsed()) return run_depth_loss(dl);
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
