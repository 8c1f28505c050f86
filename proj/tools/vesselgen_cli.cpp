// Command-line pipeline: synthetic fixtures -> preprocessing -> training ->
// sampling -> meshing -> evaluation. Every run writes a manifest with its
// arguments, seed, version, and input hashes.

#include "vesselgen/errors.hpp"
#include "vesselgen/generator.hpp"
#include "vesselgen/meshing.hpp"
#include "vesselgen/metrics.hpp"
#include "vesselgen/synthetic.hpp"
#include "vesselgen/trainer.hpp"
#include "vesselgen/tree_io.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vesselgen;

namespace {

constexpr const char* kVersion = "0.1.0";

json hash_inputs(const std::vector<fs::path>& files) {
    json j = json::object();
    for (const auto& f : files) j[f.filename().string()] = hash_file(f);
    return j;
}

json hash_dir(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    return hash_inputs(files);
}

void write_manifest(const fs::path& out_dir, json manifest) {
    manifest["version"] = kVersion;
    fs::create_directories(out_dir);
    write_text_file(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

std::string tree_name(const char* prefix, int i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%04d", prefix, i);
    return buf;
}

// ---- subcommands ---------------------------------------------------------

int cmd_synth_data(int num, std::uint64_t seed, const std::string& out, int max_height,
                   double branch_prob) {
    BranchingParams params;
    params.max_height = max_height;
    params.branch_prob = branch_prob;
    const auto trees = generate_synthetic_corpus(num, seed, params);
    std::vector<CorpusEntry> entries;
    entries.reserve(trees.size());
    for (std::size_t i = 0; i < trees.size(); ++i)
        entries.push_back({tree_name("synth", static_cast<int>(i)), trees[i]});
    save_corpus(out, entries, "raw");
    write_manifest(out, {{"command", "synth-data"},
                         {"num", num},
                         {"seed", seed},
                         {"max_height", max_height},
                         {"branch_prob", branch_prob}});
    std::cout << "wrote " << trees.size() << " trees to " << out << "\n";
    return 0;
}

int cmd_preprocess(const std::string& input, double epsilon, int max_height,
                   const std::string& out) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(input)) {
        if (!e.is_regular_file()) continue;
        const auto ext = e.path().extension();
        if (ext == ".vtree" || ext == ".swc") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw std::runtime_error("no .vtree or .swc files in " + input);

    std::vector<CorpusEntry> processed;
    std::vector<TreeStats> stats;
    for (const auto& f : files) {
        try {
            const std::string text = read_text_file(f);
            const RawCenterlineGraph g = f.extension() == ".swc" ? import_swc(text)
                                                                 : parse_graph_document(text);
            VesselTree t = binarize(g, 0);
            t = rebalance(t);
            t = trim(t, max_height);
            t = resample_rdp(t, epsilon);
            validate(t);
            stats.push_back(tree_stats(t));
            processed.push_back({f.stem().string(), std::move(t)});
        } catch (const std::exception& e) {
            throw std::runtime_error(f.string() + ": " + e.what());
        }
    }

    std::vector<VesselTree> trees;
    trees.reserve(processed.size());
    for (auto& e : processed) trees.push_back(std::move(e.tree));
    auto [normalized, norm] = normalize_corpus(trees);
    for (std::size_t i = 0; i < processed.size(); ++i) processed[i].tree = std::move(normalized[i]);

    save_corpus(out, processed, "normalized");
    save_norm_params(fs::path(out) / "norm.txt", norm);

    // Table-style per-tree stats plus corpus averages.
    int min_nodes = stats[0].node_count, max_nodes = stats[0].node_count;
    double avg_nodes = 0.0, avg_bif = 0.0;
    {
        std::string csv = "name,nodes,bifurcations,height\n";
        for (std::size_t i = 0; i < stats.size(); ++i) {
            csv += processed[i].name + "," + std::to_string(stats[i].node_count) + "," +
                   std::to_string(stats[i].bifurcation_count) + "," +
                   std::to_string(stats[i].height) + "\n";
            min_nodes = std::min(min_nodes, stats[i].node_count);
            max_nodes = std::max(max_nodes, stats[i].node_count);
            avg_nodes += stats[i].node_count;
            avg_bif += stats[i].bifurcation_count;
        }
        avg_nodes /= stats.size();
        avg_bif /= stats.size();
        write_text_file(fs::path(out) / "stats.csv", csv);
    }

    write_manifest(out, {{"command", "preprocess"},
                         {"input", input},
                         {"epsilon", epsilon},
                         {"max_height", max_height},
                         {"inputs", hash_inputs(files)},
                         {"nodes_min", min_nodes},
                         {"nodes_max", max_nodes},
                         {"nodes_avg", avg_nodes},
                         {"bifurcations_avg", avg_bif}});
    std::printf("processed %zu trees: nodes min %d max %d avg %.2f, bifurcations avg %.2f\n",
                processed.size(), min_nodes, max_nodes, avg_nodes, avg_bif);
    return 0;
}

int cmd_train(const std::string& config_file, const std::string& corpus_dir,
              const std::string& out, const std::string& profile, int epochs_override,
              long seed_override, const std::string& curve_file) {
    TrainConfig tcfg;
    if (profile == "desk") {
        tcfg.epochs = 2000;
        tcfg.checkpoint_interval = 500;
    }
    // The profile supplies defaults; the file wins for the keys it names.
    if (!config_file.empty()) tcfg = parse_train_config(read_text_file(config_file), tcfg);
    if (epochs_override >= 0) tcfg.epochs = epochs_override;
    if (seed_override >= 0) tcfg.seed = static_cast<std::uint64_t>(seed_override);

    const auto corpus = load_corpus(corpus_dir);
    const auto norm = load_norm_params(fs::path(corpus_dir) / "norm.txt");

    TrainState state = init_training(tcfg, ModelConfig{}, norm);
    std::vector<EpochRecord> curve;
    const int interval = std::max(1, tcfg.checkpoint_interval);
    train_epochs(state, corpus, tcfg.epochs, &curve, [&](const TrainState& s) {
        if (s.epoch % interval == 0) save_checkpoint(out, s);
    });
    save_checkpoint(out, state);

    const std::string curve_path = curve_file.empty() ? out + ".curve.csv" : curve_file;
    {
        std::string csv = "epoch,recon,topo,kl,total\n";
        char buf[160];
        for (const auto& r : curve) {
            std::snprintf(buf, sizeof buf, "%d,%.9g,%.9g,%.9g,%.9g\n", r.epoch, r.recon, r.topo,
                          r.kl, r.total);
            csv += buf;
        }
        write_text_file(curve_path, csv);
    }

    write_manifest(fs::path(out).parent_path().empty() ? "." : fs::path(out).parent_path(),
                   {{"command", "train"},
                    {"config", config_file},
                    {"corpus", corpus_dir},
                    {"profile", profile},
                    {"seed", tcfg.seed},
                    {"epochs", tcfg.epochs},
                    {"inputs", hash_dir(corpus_dir)},
                    {"checkpoint", fs::path(out).filename().string()}});
    if (!curve.empty()) {
        std::printf("trained %d epochs: recon %.6g topo %.6g kl %.6g total %.6g\n", state.epoch,
                    curve.back().recon, curve.back().topo, curve.back().kl, curve.back().total);
    }
    std::cout << "checkpoint written to " << out << "\n";
    return 0;
}

int cmd_generate(const std::string& ckpt, int num, std::uint64_t seed, const std::string& out,
                 int max_depth) {
    const TrainState state = load_checkpoint(ckpt);
    const int depth = max_depth >= 0 ? max_depth : state.tcfg.max_height;
    const GenerationResult res = sample_trees(state.model, state.norm, num, seed, depth);

    std::vector<CorpusEntry> entries;
    entries.reserve(res.trees.size());
    for (std::size_t i = 0; i < res.trees.size(); ++i)
        entries.push_back({tree_name("gen", static_cast<int>(i)), res.trees[i]});
    save_corpus(out, entries, "raw");
    write_manifest(out, {{"command", "generate"},
                         {"checkpoint", ckpt},
                         {"checkpoint_hash", hash_file(ckpt)},
                         {"num", num},
                         {"seed", seed},
                         {"max_depth", depth},
                         {"rejected", res.rejected}});
    std::printf("generated %d trees (%d rejected draws) to %s\n", num, res.rejected, out.c_str());
    return 0;
}

int cmd_mesh(const std::string& tree_file, int resolution, const std::string& out,
             const std::string& grid_dump) {
    const VesselTree t = parse_tree_document(read_text_file(tree_file));
    MeshingOptions opt;
    opt.resolution = resolution;
    TriMesh mesh;
    if (grid_dump.empty()) {
        mesh = mesh_tree(t, opt);
    } else {
        // Same sizing rules as mesh_tree, keeping the grid for the dump.
        double lo = t.attrs[0].x, hi = t.attrs[0].x;
        double lo2 = t.attrs[0].y, hi2 = t.attrs[0].y, lo3 = t.attrs[0].z, hi3 = t.attrs[0].z;
        for (const auto& a : t.attrs) {
            lo = std::min(lo, a.x); hi = std::max(hi, a.x);
            lo2 = std::min(lo2, a.y); hi2 = std::max(hi2, a.y);
            lo3 = std::min(lo3, a.z); hi3 = std::max(hi3, a.z);
        }
        const double longest = std::max({hi - lo, hi2 - lo2, hi3 - lo3});
        const double voxel = longest / opt.resolution;
        const auto samples = densify_centerline(t, voxel / 2.0);
        const ScalarGrid grid = sdf_grid(samples, voxel, opt.padding_voxels * voxel);
        export_grid(grid, grid_dump);
        mesh = marching_cubes(grid, 0.0);
    }
    export_obj(mesh, out);
    json manifest = {{"command", "mesh"},
                     {"tree", tree_file},
                     {"tree_hash", hash_file(tree_file)},
                     {"resolution", resolution},
                     {"vertices", mesh.vertices.size()},
                     {"triangles", mesh.triangles.size()},
                     {"version", kVersion}};
    write_text_file(out + ".manifest.json", manifest.dump(2) + "\n");
    std::printf("meshed %s: %zu vertices, %zu triangles -> %s\n", tree_file.c_str(),
                mesh.vertices.size(), mesh.triangles.size(), out.c_str());
    return 0;
}

int cmd_evaluate(const std::string& real_dir, const std::string& gen_dir,
                 const std::string& out) {
    const auto real_entries = load_corpus(real_dir);
    const auto gen_entries = load_corpus(gen_dir);
    std::vector<VesselTree> real, gen;
    for (const auto& e : real_entries) real.push_back(e.tree);
    for (const auto& e : gen_entries) gen.push_back(e.tree);

    const MetricsReport rep = evaluate_sets(real, gen);
    write_report_csv(rep, out);
    write_manifest(out, {{"command", "evaluate"},
                         {"real", real_dir},
                         {"gen", gen_dir},
                         {"real_inputs", hash_dir(real_dir)},
                         {"gen_inputs", hash_dir(gen_dir)}});
    std::printf("CS radius %.4f tortuosity %.4f length %.4f | EMD %.4g %.4g %.4g | "
                "MMD %.6g COV %.3f 1-NNA %.3f\n",
                rep.radius.cosine_similarity, rep.tort.cosine_similarity,
                rep.length.cosine_similarity, rep.radius.emd, rep.tort.emd, rep.length.emd,
                rep.sets.mmd, rep.sets.coverage, rep.sets.one_nna);
    if (report_has_nan(rep)) throw NumericalError("metrics report contains NaN");
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"vesselgen: generative modeling of 3-D blood vessel trees"};
    app.require_subcommand(1);

    // synth-data
    auto* synth = app.add_subcommand("synth-data", "generate a procedural fixture corpus");
    int sd_num = 100;
    std::uint64_t sd_seed = 1;
    std::string sd_out;
    int sd_max_height = 5;
    double sd_branch_prob = 0.35;
    synth->add_option("--num", sd_num, "number of trees")->required();
    synth->add_option("--seed", sd_seed, "rng seed")->required();
    synth->add_option("--out", sd_out, "output corpus directory")->required();
    synth->add_option("--max-height", sd_max_height, "tree height cap");
    synth->add_option("--branch-prob", sd_branch_prob, "bifurcation probability");

    // preprocess
    auto* prep = app.add_subcommand("preprocess", "binarize, rebalance, trim, resample, normalize");
    std::string pp_input, pp_out;
    double pp_epsilon = 0.2;
    int pp_max_height = 10;
    prep->add_option("--input", pp_input, "input corpus directory (.vtree/.swc)")->required();
    prep->add_option("--epsilon", pp_epsilon, "RDP distance threshold (raw units)");
    prep->add_option("--max-height", pp_max_height, "trim height");
    prep->add_option("--out", pp_out, "output corpus directory")->required();

    // train
    auto* train = app.add_subcommand("train", "train the recursive VAE");
    std::string tr_config, tr_corpus, tr_out, tr_profile = "full", tr_curve;
    int tr_epochs = -1;
    long tr_seed = -1;
    train->add_option("--config", tr_config, "training config file");
    train->add_option("--corpus", tr_corpus, "preprocessed corpus directory")->required();
    train->add_option("--out", tr_out, "checkpoint output path")->required();
    train->add_option("--profile", tr_profile, "full|desk preset")
        ->check(CLI::IsMember({"full", "desk"}));
    train->add_option("--epochs", tr_epochs, "override epoch count");
    train->add_option("--seed", tr_seed, "override rng seed");
    train->add_option("--curve", tr_curve, "loss curve csv path");

    // generate
    auto* gen = app.add_subcommand("generate", "sample new trees from a checkpoint");
    std::string gn_ckpt, gn_out;
    int gn_num = 100, gn_max_depth = -1;
    std::uint64_t gn_seed = 1;
    gen->add_option("--ckpt", gn_ckpt, "checkpoint file")->required();
    gen->add_option("--num", gn_num, "number of trees")->required();
    gen->add_option("--seed", gn_seed, "rng seed")->required();
    gen->add_option("--out", gn_out, "output corpus directory")->required();
    gen->add_option("--max-depth", gn_max_depth, "decode depth cap (default: training height)");

    // mesh
    auto* mesh = app.add_subcommand("mesh", "convert a tree to a surface mesh");
    std::string ms_tree, ms_out, ms_grid;
    int ms_res = 128;
    mesh->add_option("--tree", ms_tree, "tree document")->required();
    mesh->add_option("--resolution", ms_res, "lattice points along longest bbox edge");
    mesh->add_option("--out", ms_out, "output OBJ path")->required();
    mesh->add_option("--dump-grid", ms_grid, "also write the raw field grid (debug)");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "morphometric + set-level comparison");
    std::string ev_real, ev_gen, ev_out;
    eval->add_option("--real", ev_real, "reference corpus directory")->required();
    eval->add_option("--gen", ev_gen, "generated corpus directory")->required();
    eval->add_option("--out", ev_out, "report output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (synth->parsed())
            return cmd_synth_data(sd_num, sd_seed, sd_out, sd_max_height, sd_branch_prob);
        if (prep->parsed()) return cmd_preprocess(pp_input, pp_epsilon, pp_max_height, pp_out);
        if (train->parsed())
            return cmd_train(tr_config, tr_corpus, tr_out, tr_profile, tr_epochs, tr_seed,
                             tr_curve);
        if (gen->parsed()) return cmd_generate(gn_ckpt, gn_num, gn_seed, gn_out, gn_max_depth);
        if (mesh->parsed()) return cmd_mesh(ms_tree, ms_res, ms_out, ms_grid);
        if (eval->parsed()) return cmd_evaluate(ev_real, ev_gen, ev_out);
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
