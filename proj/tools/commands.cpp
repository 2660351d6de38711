#include "commands.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "sscnn/checkpoint.hpp"
#include "sscnn/errors.hpp"
#include "sscnn/gradcheck.hpp"
#include "sscnn/graph.hpp"
#include "sscnn/io.hpp"
#include "sscnn/metrics.hpp"
#include "sscnn/train.hpp"
#include "sscnn/transforms.hpp"

namespace fs = std::filesystem;

namespace sscnn::cli {

namespace {

std::string flat_name(const ShapeEntry& entry) { return entry.category + "__" + entry.id; }

fs::path basis_path(const RunConfig& config, const ShapeEntry& entry) {
    return config.out_dir / "bases" / (flat_name(entry) + ".basis");
}

fs::path fmap_path(const RunConfig& config, const ShapeEntry& entry) {
    return config.out_dir / "sync" / (flat_name(entry) + ".fmap");
}

std::string basis_params_string(const RunConfig& config) {
    std::ostringstream os;
    os << "k=" << config.knn << " m=" << config.eigen_count
       << " dense=" << config.dense_threshold;
    return os.str();
}

EigensolverOptions eigen_options(const RunConfig& config) {
    EigensolverOptions opts;
    opts.dense_threshold = config.dense_threshold;
    return opts;
}

/// Shapes a command operates on: the union of both splits when given,
/// otherwise the whole dataset.
std::vector<ShapeEntry> selected_shapes(const RunConfig& config) {
    const std::vector<ShapeEntry> dataset = scan_dataset(config.dataset_root);
    if (config.train_split.empty() && config.test_split.empty()) return dataset;
    std::vector<ShapeEntry> out;
    std::set<std::string> seen;
    for (const fs::path& split : {config.train_split, config.test_split}) {
        if (split.empty()) continue;
        for (const ShapeEntry& e : read_split(split, dataset))
            if (seen.insert(e.key()).second) out.push_back(e);
    }
    return out;
}

std::vector<ShapeEntry> split_shapes(const RunConfig& config, const fs::path& split) {
    const std::vector<ShapeEntry> dataset = scan_dataset(config.dataset_root);
    if (split.empty()) return dataset;
    return read_split(split, dataset);
}

SpectralBasis compute_basis(const RunConfig& config, const PointCloud& pc) {
    const WeightedGraph graph = build_knn_graph(pc, config.knn);
    const int m = std::min(config.eigen_count, pc.size());
    return eigendecompose(laplacian(graph), m, eigen_options(config));
}

void run_parallel(int jobs, int count, const std::function<void(int)>& work) {
    if (jobs <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    const int thread_count = std::min(jobs, count);
    for (int t = 0; t < thread_count; ++t) {
        workers.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) work(i);
        });
    }
    for (std::thread& w : workers) w.join();
}

/// Per-category part label table for cross-category runs: category c's part
/// p maps to global label offset(c) + p.
struct PartTable {
    std::map<std::string, int> category_id;     // name -> dense id
    std::map<std::string, int> offset;          // name -> global label base
    std::map<int, int> part_to_category;        // global label -> category id
    int total_labels = 0;
};

PartTable build_part_table(const RunConfig& config, const std::vector<ShapeEntry>& entries) {
    PartTable table;
    std::map<std::string, int> max_label;
    for (const ShapeEntry& e : entries) {
        fs::path seg = e.pts;
        seg.replace_extension(".seg");
        if (!fs::exists(seg)) continue;
        int top = 0;
        for (int label : read_seg(seg)) top = std::max(top, label);
        auto [it, inserted] = max_label.try_emplace(e.category, top);
        if (!inserted) it->second = std::max(it->second, top);
    }
    int next_id = 0;
    int offset = 0;
    for (const auto& [category, top] : max_label) {
        table.category_id[category] = next_id;
        table.offset[category] = offset;
        for (int p = 0; p <= top; ++p) table.part_to_category[offset + p] = next_id;
        offset += top + 1;
        ++next_id;
    }
    table.total_labels = offset;
    return table;
}

TrainingShape load_training_shape(const RunConfig& config, const ShapeEntry& entry,
                                  const PartTable* parts, bool need_voxel,
                                  bool need_fmap_target) {
    PointCloud pc = read_pts(entry.pts);
    if (pc.size() < 2) throw IoError(entry.key() + ": too few points");
    pc = normalize_to_unit_cube(pc);

    TrainingShape shape;
    shape.key = entry.key();

    fs::path seg = entry.pts;
    seg.replace_extension(".seg");
    if ((config.task == "segmentation" || config.task == "keypoint")) {
        if (!fs::exists(seg))
            throw MissingPrerequisite("label file " + seg.string(), "the dataset");
        std::vector<int> labels = read_seg(seg);
        if (static_cast<int>(labels.size()) != pc.size())
            throw IoError(entry.key() + ": label count differs from point count");
        if (config.cross_category && parts) {
            const int offset = parts->offset.at(entry.category);
            for (int& label : labels) label += offset;
            shape.category = parts->category_id.at(entry.category);
        }
        shape.labels = std::move(labels);
    }

    fs::path nrm = entry.pts;
    nrm.replace_extension(".nrm");
    if (config.task == "normals" || config.input_features == "xyz_normals") {
        if (!fs::exists(nrm))
            throw MissingPrerequisite("normals file " + nrm.string(), "the dataset");
        auto normals = read_nrm(nrm);
        if (normals.rows() != pc.size())
            throw IoError(entry.key() + ": normal count differs from point count");
        shape.normals = std::move(normals);
    }

    shape.features = pc.points;
    if (config.input_features == "xyz_normals") {
        Matrix f(pc.size(), 6);
        f.leftCols(3) = pc.points;
        f.rightCols(3) = *shape.normals;
        shape.features = std::move(f);
    }

    const fs::path cache = basis_path(config, entry);
    if (!fs::exists(cache))
        throw MissingPrerequisite("basis cache " + cache.string(), "build-basis");
    shape.basis = read_basis(cache);
    if (shape.basis.n() != pc.size())
        throw IoError(entry.key() + ": basis cache does not match the point count");

    if (need_voxel) {
        if (shape.basis.count() < config.k_local)
            throw IoError(entry.key() + ": basis smaller than sync.k_local");
        shape.voxel_values =
            voxelize_bases(pc, shape.basis, config.resolution, config.k_local).values;
    }
    if (need_fmap_target) {
        const fs::path fmap = fmap_path(config, entry);
        if (!fs::exists(fmap))
            throw MissingPrerequisite("functional map " + fmap.string(), "precompute-fmap");
        shape.fmap_target = read_fmap(fmap).matrix;
    }
    // The raw (normalized) cloud is re-read on demand by callers needing it.
    return shape;
}

std::vector<TrainingShape> load_split_shapes(const RunConfig& config, const fs::path& split,
                                             const PartTable* parts, bool need_voxel,
                                             bool need_fmap_target) {
    std::vector<ShapeEntry> entries = split_shapes(config, split);
    std::vector<TrainingShape> shapes(entries.size());
    std::mutex error_mutex;
    std::string first_error;
    run_parallel(config.jobs, static_cast<int>(entries.size()), [&](int i) {
        try {
            shapes[i] =
                load_training_shape(config, entries[i], parts, need_voxel, need_fmap_target);
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (first_error.empty()) first_error = e.what();
        }
    });
    if (!first_error.empty()) throw Error(first_error);
    return shapes;
}

SpecTNConfig spectn_config(const RunConfig& config) {
    SpecTNConfig sc;
    sc.resolution = config.resolution;
    sc.k_local = config.k_local;
    sc.k_canon = config.k_canon * config.num_averages;
    sc.conv1_channels = config.spectn_conv1;
    sc.conv2_channels = config.spectn_conv2;
    sc.hidden = config.spectn_hidden;
    return sc;
}

struct SegEvalResult {
    std::map<std::string, CategoryIou> per_category;
    double weighted_mean = 0.0;
    double majority_accuracy = -1.0;  // < 0 when not applicable
};

std::vector<int> argmax_labels(const Matrix& logits) {
    std::vector<int> labels(logits.rows());
    for (int i = 0; i < logits.rows(); ++i) {
        int best = 0;
        for (int j = 1; j < logits.cols(); ++j)
            if (logits(i, j) > logits(i, best)) best = j;
        labels[i] = best;
    }
    return labels;
}

SegEvalResult evaluate_segmentation(const Network& net,
                                    const std::vector<ShapeEntry>& entries,
                                    const std::vector<TrainingShape>& shapes,
                                    const PartTable* parts) {
    SegEvalResult result;
    std::map<int, CategoryIou> by_id;
    long vote_correct = 0;
    long vote_total = 0;
    for (size_t i = 0; i < shapes.size(); ++i) {
        const TrainingShape& shape = shapes[i];
        FmapContext ctx;
        if (shape.voxel_values) ctx.voxel_values = &*shape.voxel_values;
        const Matrix logits = net.predict(shape.basis, ctx, shape.features);
        const std::vector<int> predicted = argmax_labels(logits);
        const double shape_iou = iou(predicted, *shape.labels).mean;

        CategoryIou& cat = result.per_category[entries[i].category];
        cat.mean_iou = (cat.mean_iou * cat.shape_count + shape_iou) / (cat.shape_count + 1);
        ++cat.shape_count;

        if (parts) {
            ++vote_total;
            if (majority_vote_classify(predicted, parts->part_to_category) == shape.category)
                ++vote_correct;
        }
    }
    int dense_id = 0;
    for (const auto& [name, cat] : result.per_category) by_id[dense_id++] = cat;
    result.weighted_mean = category_mean_iou(by_id);
    if (parts && vote_total > 0)
        result.majority_accuracy = static_cast<double>(vote_correct) / vote_total;
    return result;
}

void write_metrics_csv(const fs::path& path, const SegEvalResult& result) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << "category,count,mean_iou\n";
    long total = 0;
    for (const auto& [name, cat] : result.per_category) {
        os << name << "," << cat.shape_count << "," << format_double(cat.mean_iou) << "\n";
        total += cat.shape_count;
    }
    os << "all," << total << "," << format_double(result.weighted_mean) << "\n";
    if (result.majority_accuracy >= 0.0)
        os << "majority_vote_accuracy," << total << ","
           << format_double(result.majority_accuracy) << "\n";
}

Network load_model_checkpoint(const RunConfig& config) {
    const fs::path path = config.out_dir / "model.ckpt";
    if (!fs::exists(path))
        throw MissingPrerequisite("model checkpoint " + path.string(), "train");
    return load_checkpoint(path.string());
}

}  // namespace

int cmd_build_basis(const RunConfig& config) {
    config.validate_dataset_paths();
    const std::vector<ShapeEntry> entries = selected_shapes(config);
    if (entries.empty()) throw ConfigError("no shapes");

    fs::create_directories(config.out_dir / "bases");
    const std::string params = basis_params_string(config);

    std::atomic<int> failures{0};
    std::atomic<int> hits{0};
    std::mutex log_mutex;
    run_parallel(config.jobs, static_cast<int>(entries.size()), [&](int i) {
        const ShapeEntry& entry = entries[i];
        try {
            const fs::path out = basis_path(config, entry);
            const fs::path meta = out.string() + ".meta";
            const std::uint64_t hash = content_hash(entry.pts, params);
            if (fs::exists(out) && fs::exists(meta)) {
                std::ifstream is(meta);
                std::uint64_t cached = 0;
                is >> cached;
                if (is && cached == hash) {
                    ++hits;
                    std::lock_guard<std::mutex> lock(log_mutex);
                    std::cout << "cache hit: " << entry.key() << "\n";
                    return;
                }
            }
            PointCloud pc = normalize_to_unit_cube(read_pts(entry.pts));
            const SpectralBasis basis = compute_basis(config, pc);
            write_basis(out, basis);
            std::ofstream os(meta, std::ios::binary);
            os << hash << "\n";
            std::lock_guard<std::mutex> lock(log_mutex);
            std::cout << "built basis: " << entry.key() << " (n=" << basis.n()
                      << " m=" << basis.count() << ")\n";
        } catch (const std::exception& e) {
            ++failures;
            std::lock_guard<std::mutex> lock(log_mutex);
            std::cerr << "basis failed for " << entry.key() << ": " << e.what() << "\n";
        }
    });
    return failures.load() == 0 ? 0 : 1;
}

int cmd_precompute_fmap(const RunConfig& config) {
    config.validate_dataset_paths();
    const std::vector<ShapeEntry> entries = selected_shapes(config);
    if (entries.empty()) throw ConfigError("no shapes");

    fs::create_directories(config.out_dir / "sync");

    // Voxelize every shape's basis and occupancy.
    std::vector<VoxelBasis> voxel_bases(entries.size());
    std::vector<VoxelShape> voxel_shapes(entries.size());
    std::mutex error_mutex;
    std::string first_error;
    run_parallel(config.jobs, static_cast<int>(entries.size()), [&](int i) {
        try {
            PointCloud pc = normalize_to_unit_cube(read_pts(entries[i].pts));
            const fs::path cache = basis_path(config, entries[i]);
            if (!fs::exists(cache))
                throw MissingPrerequisite("basis cache " + cache.string(), "build-basis");
            const SpectralBasis basis = read_basis(cache);
            if (basis.count() < config.k_local)
                throw Error(entries[i].key() + ": basis smaller than sync.k_local");
            voxel_bases[i] = voxelize_bases(pc, basis, config.resolution, config.k_local);
            voxel_shapes[i] = make_voxel_shape(voxel_bases[i].occupancy, config.resolution);
        } catch (const std::exception& e) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (first_error.empty())
                first_error = entries[i].key() + std::string(": ") + e.what();
        }
    });
    if (!first_error.empty()) {
        std::cerr << first_error << "\n";
        return 1;
    }

    // Group shapes, build one average per group, then map every shape into
    // the stacked canonical domain of its assigned average.
    const std::vector<int> groups = cluster_occupancies(voxel_shapes, config.num_averages);
    std::vector<AverageShape> averages;
    for (int g = 0; g < config.num_averages; ++g) {
        std::vector<VoxelShape> members;
        for (size_t i = 0; i < entries.size(); ++i)
            if (groups[i] == g) members.push_back(voxel_shapes[i]);
        if (members.empty())
            throw Error("average group " + std::to_string(g) + " is empty; reduce num_averages");
        averages.push_back(build_average_shape(members, config.k_canon, eigen_options(config)));
        const fs::path avg_file =
            config.out_dir / "sync" / ("avg" + std::to_string(g) + ".avg");
        write_average_shape(avg_file, averages.back());
        write_basis(config.out_dir / "sync" / ("avg" + std::to_string(g) + ".basis"),
                    averages.back().basis);
        std::cout << "average shape " << g << ": " << members.size() << " members\n";
    }

    for (size_t i = 0; i < entries.size(); ++i) {
        const int assigned = assign_average(voxel_shapes[i].occupancy, averages);
        std::vector<int> onehot(averages.size(), 0);
        onehot[assigned] = 1;
        const FunctionalMap map =
            precompute_fmap_multi(voxel_bases[i], averages, onehot, config.k_local);
        write_fmap(fmap_path(config, entries[i]), map);
    }
    std::cout << "wrote " << entries.size() << " functional maps\n";
    return 0;
}

int cmd_pretrain_spectn(const RunConfig& config) {
    config.validate_dataset_paths();
    const PartTable parts = build_part_table(config, selected_shapes(config));
    std::vector<TrainingShape> shapes =
        load_split_shapes(config, config.train_split, &parts, true, true);
    if (shapes.empty()) throw ConfigError("no shapes");

    const SpecTNConfig sc = spectn_config(config);
    ParamStore params;
    SpecTN(sc).init_params(params, config.seed);

    TrainOptions opts;
    opts.learning_rate = config.pretrain_learning_rate;
    opts.epochs = config.pretrain_epochs;
    opts.seed = config.seed;
    opts.optimizer = config.optimizer;
    opts.ortho_weight = config.ortho_weight;
    const std::vector<LossRecord> history = pretrain_spectn(sc, params, shapes, opts);

    fs::create_directories(config.out_dir);
    save_params((config.out_dir / "spectn.ckpt").string(), params,
                static_cast<std::int64_t>(history.size()));
    write_loss_history((config.out_dir / "history_pretrain.csv").string(), history);
    if (!history.empty())
        std::cout << "pretrain loss: " << history.front().loss << " -> "
                  << history.back().loss << " over " << history.size() << " epochs\n";
    return 0;
}

int cmd_train(const RunConfig& config) {
    config.validate_dataset_paths();
    ModelConfig model = config.make_model();
    const PartTable parts = build_part_table(config, selected_shapes(config));
    if (config.cross_category && config.task == "segmentation") {
        model.head.output_dim = parts.total_labels;
        model.validate();
    }

    std::vector<TrainingShape> shapes =
        load_split_shapes(config, config.train_split, &parts, model.any_spectn(), false);
    if (shapes.empty()) throw ConfigError("no shapes");

    Network net(model);
    net.init_params(config.seed);
    if (model.any_spectn()) {
        const fs::path pretrained = config.out_dir / "spectn.ckpt";
        if (!fs::exists(pretrained))
            throw MissingPrerequisite("pretrained transformer " + pretrained.string(),
                                      "pretrain-spectn");
        for (auto& [name, value] : load_params(pretrained.string()))
            net.params()[name] = std::move(value);
    }

    TrainOptions opts;
    opts.learning_rate = config.learning_rate;
    opts.epochs = config.epochs;
    opts.seed = config.seed;
    opts.optimizer = config.optimizer;
    opts.ortho_weight = model.any_spectn() ? config.ortho_weight : 0.0;
    if (config.checkpoint_every > 0) {
        opts.on_epoch = [&](int epoch, double loss) {
            if (epoch % config.checkpoint_every == 0) {
                save_checkpoint((config.out_dir /
                                 ("model_epoch" + std::to_string(epoch) + ".ckpt"))
                                    .string(),
                                net);
            }
            std::cout << "epoch " << epoch << " loss " << loss << "\n";
            return true;
        };
    }

    const std::vector<LossRecord> history = train_network(net, shapes, opts);
    fs::create_directories(config.out_dir);
    save_checkpoint((config.out_dir / "model.ckpt").string(), net);
    write_loss_history((config.out_dir / "history_train.csv").string(), history);
    if (!history.empty())
        std::cout << "train loss: " << history.front().loss << " -> "
                  << history.back().loss << " over " << history.size() << " epochs\n";
    return 0;
}

int cmd_eval(const RunConfig& config) {
    config.validate_dataset_paths();
    Network net = load_model_checkpoint(config);
    const PartTable parts = build_part_table(config, selected_shapes(config));
    const PartTable* parts_ptr =
        (config.cross_category && config.task == "segmentation") ? &parts : nullptr;

    const std::vector<ShapeEntry> entries = split_shapes(config, config.test_split);
    std::vector<TrainingShape> shapes = load_split_shapes(
        config, config.test_split, &parts, net.config().any_spectn(), false);
    if (shapes.empty()) throw ConfigError("no shapes");
    fs::create_directories(config.out_dir);

    if (config.task == "segmentation") {
        const SegEvalResult result = evaluate_segmentation(net, entries, shapes, parts_ptr);
        write_metrics_csv(config.out_dir / "metrics.csv", result);
        std::cout << "mean_iou " << format_double(result.weighted_mean) << "\n";
        if (result.majority_accuracy >= 0.0)
            std::cout << "majority_vote_accuracy " << format_double(result.majority_accuracy)
                      << "\n";
        return 0;
    }

    if (config.task == "keypoint") {
        std::vector<KeypointResult> results;
        for (size_t i = 0; i < shapes.size(); ++i) {
            const TrainingShape& shape = shapes[i];
            FmapContext ctx;
            if (shape.voxel_values) ctx.voxel_values = &*shape.voxel_values;
            const Matrix logits = net.predict(shape.basis, ctx, shape.features);
            // Per-point class probabilities; keypoint k's prediction is the
            // highest-probability point for class k (class 0 = background).
            Matrix probs = logits;
            for (int r = 0; r < probs.rows(); ++r) {
                const Eigen::RowVectorXd shifted =
                    probs.row(r).array() - probs.row(r).maxCoeff();
                const Eigen::RowVectorXd expz = shifted.array().exp();
                probs.row(r) = expz / expz.sum();
            }
            PointCloud pc = normalize_to_unit_cube(read_pts(entries[i].pts));
            std::vector<Eigen::RowVector3d> pred_rows, truth_rows;
            for (int k = 1; k < logits.cols(); ++k) {
                int truth_point = -1;
                for (size_t p = 0; p < shape.labels->size(); ++p)
                    if ((*shape.labels)[p] == k) {
                        truth_point = static_cast<int>(p);
                        break;
                    }
                if (truth_point < 0) continue;  // keypoint not annotated
                int best = 0;
                for (int p = 1; p < probs.rows(); ++p)
                    if (probs(p, k) > probs(best, k)) best = p;
                pred_rows.push_back(pc.points.row(best));
                truth_rows.push_back(pc.points.row(truth_point));
            }
            KeypointResult r;
            r.predicted.resize(static_cast<int>(pred_rows.size()), 3);
            r.truth.resize(static_cast<int>(truth_rows.size()), 3);
            for (size_t k = 0; k < pred_rows.size(); ++k) {
                r.predicted.row(static_cast<int>(k)) = pred_rows[k];
                r.truth.row(static_cast<int>(k)) = truth_rows[k];
            }
            results.push_back(std::move(r));
        }
        std::vector<double> thresholds;
        for (int t = 1; t <= 25; ++t) thresholds.push_back(0.01 * t);
        const std::vector<double> curve = pck(results, thresholds);
        std::ofstream os(config.out_dir / "pck.csv", std::ios::binary);
        os << "threshold,pck\n";
        for (size_t t = 0; t < thresholds.size(); ++t)
            os << format_double(thresholds[t]) << "," << format_double(curve[t]) << "\n";
        std::cout << "pck@0.01 " << format_double(curve.front()) << "\n";
        return 0;
    }

    // normals
    double angle_sum = 0.0, l2_sum = 0.0;
    int zero_count = 0;
    for (const TrainingShape& shape : shapes) {
        FmapContext ctx;
        if (shape.voxel_values) ctx.voxel_values = &*shape.voxel_values;
        const Matrix out = net.predict(shape.basis, ctx, shape.features);
        const NormalErrorResult r = normal_error(out, *shape.normals);
        angle_sum += r.mean_angle_deg;
        l2_sum += r.l2;
        zero_count += r.zero_norm_count;
    }
    std::ofstream os(config.out_dir / "normals.csv", std::ios::binary);
    os << "mean_angle_deg,l2,zero_norm_count\n";
    os << format_double(angle_sum / shapes.size()) << ","
       << format_double(l2_sum / shapes.size()) << "," << zero_count << "\n";
    std::cout << "normal_angle_deg " << format_double(angle_sum / shapes.size()) << "\n";
    return 0;
}

int cmd_predict(const RunConfig& config, const std::string& shape_arg) {
    Network net = load_model_checkpoint(config);

    // Accept either a dataset key or a .pts path.
    fs::path pts;
    std::string stem;
    if (shape_arg.size() > 4 && shape_arg.ends_with(".pts")) {
        pts = shape_arg;
        stem = pts.stem().string();
    } else {
        config.validate_dataset_paths();
        const std::vector<ShapeEntry> dataset = scan_dataset(config.dataset_root);
        for (const ShapeEntry& e : dataset)
            if (e.key() == shape_arg || e.id == shape_arg) {
                pts = e.pts;
                stem = e.id;
                break;
            }
        if (pts.empty()) throw ConfigError("shape '" + shape_arg + "' not found");
    }

    PointCloud pc = normalize_to_unit_cube(read_pts(pts));
    const SpectralBasis basis = compute_basis(config, pc);
    FmapContext ctx;
    Matrix voxels;
    if (net.config().any_spectn()) {
        voxels = voxelize_bases(pc, basis, net.config().spectn.resolution,
                                net.config().spectn.k_local)
                     .values;
        ctx.voxel_values = &voxels;
    }
    const Matrix output = net.predict(basis, ctx, pc.points);

    fs::create_directories(config.out_dir);
    if (net.config().head.kind == HeadKind::Normals) {
        const fs::path out = config.out_dir / (stem + ".nrm");
        write_nrm(out, output);
        std::cout << "wrote " << out.string() << "\n";
    } else {
        const fs::path out = config.out_dir / (stem + ".seg");
        write_seg(out, argmax_labels(output));
        std::cout << "wrote " << out.string() << "\n";
    }
    return 0;
}

int cmd_gradcheck(const RunConfig& config) {
    // Self-contained: a 30-vertex random shape against the tiny preset.
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.05, 0.95);
    PointCloud pc;
    pc.points.resize(30, 3);
    for (int i = 0; i < 30; ++i)
        for (int a = 0; a < 3; ++a) pc.points(i, a) = unit(rng);

    ModelConfig model = paper10_tiny_preset(4, 3, HeadConfig{HeadKind::Segmentation, 3});
    const WeightedGraph graph = build_knn_graph(pc, 4);
    TrainingShape shape;
    shape.key = "gradcheck";
    shape.basis = eigendecompose(laplacian(graph), 20);
    shape.features = pc.points;
    std::vector<int> labels(30);
    for (int i = 0; i < 30; ++i) labels[i] = i % 3;
    shape.labels = labels;
    shape.voxel_values =
        voxelize_bases(pc, shape.basis, model.spectn.resolution, model.spectn.k_local).values;

    Network net(model);
    net.init_params(config.seed);
    const GradCheckReport report = finite_difference_check(net, shape, config.ortho_weight);
    std::cout << "checked " << report.entries_checked << " parameter entries\n";
    std::cout << "max relative error " << format_double(report.max_rel_error) << " ("
              << report.worst_tensor << ")\n";
    return report.max_rel_error < 1e-4 ? 0 : 1;
}

int cmd_plot_kernel(const RunConfig& config, const PlotKernelFlags& flags) {
    const KernelKind kind = kernel_kind_from_string(
        flags.kind.empty() ? config.kernel : flags.kind);

    KernelSpec spec;
    spec.kind = kind;
    spec.dilation = flags.gamma;
    if (flags.params.empty()) {
        // Single modulated/exponential window (the j = 1 term) so the
        // dilation parameter is visible in the profile.
        switch (kind) {
            case KernelKind::ModulatedExpWindow:
                spec.order = 1;
                spec.coeffs = Vector::Zero(3);
                spec.coeffs[2] = 1.0;
                break;
            case KernelKind::ExpWindow:
                spec.order = 1;
                spec.coeffs = Vector::Zero(2);
                spec.coeffs[1] = 1.0;
                break;
            case KernelKind::CubicSpline:
                spec.order = 7;
                spec.coeffs = Vector::Ones(7);
                break;
        }
    } else {
        std::vector<double> values;
        std::istringstream is(flags.params);
        std::string token;
        while (std::getline(is, token, ','))
            if (!token.empty()) values.push_back(std::stod(token));
        if (values.empty()) throw ConfigError("--params is empty");
        spec.coeffs = Eigen::Map<Vector>(values.data(), values.size());
        switch (kind) {
            case KernelKind::ModulatedExpWindow:
                if (values.size() % 2 == 0)
                    throw ConfigError("modulated window needs an odd coefficient count");
                spec.order = (static_cast<int>(values.size()) - 1) / 2;
                break;
            case KernelKind::ExpWindow:
                spec.order = static_cast<int>(values.size()) - 1;
                break;
            case KernelKind::CubicSpline:
                spec.order = static_cast<int>(values.size());
                break;
        }
    }

    SpectralBasis basis;
    if (flags.basis_path.empty()) {
        // Built-in 200-vertex ring so the command works without a dataset.
        const int n = 200;
        PointCloud ring;
        ring.points.resize(n, 3);
        for (int i = 0; i < n; ++i) {
            const double angle = 2.0 * std::numbers::pi * i / n;
            ring.points.row(i) << std::cos(angle), std::sin(angle), 0.0;
        }
        basis = eigendecompose(laplacian(build_knn_graph(ring, 2)),
                               std::min(config.eigen_count, n));
    } else {
        basis = read_basis(flags.basis_path);
    }
    if (flags.center < 0 || flags.center >= basis.n())
        throw ConfigError("--center out of range");

    const Vector multipliers = kernel_multipliers(spec, basis.eigenvalues);
    const VertexSignal profile = spatial_kernel_profile(spec, basis, flags.center);

    fs::create_directories(config.out_dir);
    {
        std::ofstream os(config.out_dir / "kernel_spectral.csv", std::ios::binary);
        os << "lambda,multiplier\n";
        for (int i = 0; i < multipliers.size(); ++i)
            os << format_double(basis.eigenvalues[i]) << ","
               << format_double(multipliers[i]) << "\n";
    }
    {
        std::ofstream os(config.out_dir / "kernel_spatial.csv", std::ios::binary);
        os << "vertex,value\n";
        for (int v = 0; v < profile.rows(); ++v)
            os << v << "," << format_double(profile(v, 0)) << "\n";
    }
    std::cout << "wrote kernel_spectral.csv and kernel_spatial.csv\n";
    return 0;
}

int cmd_downsample_eval(const RunConfig& config, const std::vector<double>& ratios) {
    config.validate_dataset_paths();
    if (ratios.empty()) throw ConfigError("no ratios given");
    Network net = load_model_checkpoint(config);
    if (config.task != "segmentation")
        throw ConfigError("downsample-eval expects a segmentation model");

    const PartTable parts = build_part_table(config, selected_shapes(config));
    const PartTable* parts_ptr = config.cross_category ? &parts : nullptr;
    const std::vector<ShapeEntry> entries = split_shapes(config, config.test_split);
    if (entries.empty()) throw ConfigError("no shapes");

    fs::create_directories(config.out_dir);
    std::ofstream os(config.out_dir / "downsample.csv", std::ios::binary);
    os << "ratio,mean_iou\n";

    for (double ratio : ratios) {
        std::vector<TrainingShape> shapes;
        if (ratio >= 1.0) {
            // Ratio 1 must reproduce cmd_eval exactly, so it reuses the
            // cached bases rather than recomputing.
            shapes = load_split_shapes(config, config.test_split, &parts,
                                       net.config().any_spectn(), false);
        } else {
            for (const ShapeEntry& entry : entries) {
                TrainingShape full =
                    load_training_shape(config, entry, &parts, false, false);
                PointCloud pc = normalize_to_unit_cube(read_pts(entry.pts));
                pc.labels = full.labels;
                if (full.normals) pc.normals = full.normals;
                PointCloud down = downsample(pc, ratio, config.seed, config.knn + 1);

                TrainingShape shape;
                shape.key = entry.key();
                shape.category = full.category;
                shape.features = down.points;
                shape.labels = down.labels;
                if (down.normals) shape.normals = down.normals;
                shape.basis = compute_basis(config, down);
                if (net.config().any_spectn()) {
                    if (shape.basis.count() < net.config().spectn.k_local)
                        throw Error(entry.key() + ": downsampled basis too small for sync");
                    shape.voxel_values =
                        voxelize_bases(down, shape.basis, net.config().spectn.resolution,
                                       net.config().spectn.k_local)
                            .values;
                }
                shapes.push_back(std::move(shape));
            }
        }
        const SegEvalResult result = evaluate_segmentation(net, entries, shapes, parts_ptr);
        os << format_double(ratio) << "," << format_double(result.weighted_mean) << "\n";
        std::cout << "ratio " << ratio << " mean_iou " << result.weighted_mean << "\n";
    }
    return 0;
}

}  // namespace sscnn::cli
