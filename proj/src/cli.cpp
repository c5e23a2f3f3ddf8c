// Copyright Contributors to the Texton Engine Project
// SPDX-License-Identifier: Apache-2.0
//
#include "texton/cli.hpp"

#include "texton/animation.hpp"
#include "texton/editing.hpp"
#include "texton/estimation.hpp"
#include "texton/io.hpp"
#include "texton/objectives.hpp"
#include "texton/service.hpp"
#include "texton/splatting.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <sstream>

namespace texton {

namespace {

struct Globals {
    std::uint64_t seed = 0;
    std::string out;
    std::string frame;
    int nf = kDefaultFeatureDim;
};

class UsageError : public Error {
public:
    using Error::Error;
};

ImageFrame parseFrame(const std::string &text) {
    int w = 0, h = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%dx%d%c", &w, &h, &tail) != 2 || w < 1 || h < 1) {
        throw UsageError("--frame must look like WxH, got '" + text + "'");
    }
    return {w, h};
}

std::vector<double> parseNumbers(const std::string &text, std::size_t count, const char *flag) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception &) {
            throw UsageError(std::string(flag) + ": '" + item + "' is not a number");
        }
    }
    if (count && values.size() != count) {
        throw UsageError(std::string(flag) + " expects " + std::to_string(count) + " comma-separated numbers");
    }
    return values;
}

const std::string &requireOut(const Globals &g) {
    if (g.out.empty()) {
        throw UsageError("--out is required");
    }
    return g.out;
}

void saveDerived(const GaussianSet &set, const Globals &g, const TextonDocument &source) {
    saveSet(set, requireOut(g), source.provenance);
}

} // namespace

int runCli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"Compositional Gaussian texton engine"};
    app.fallthrough();
    app.require_subcommand(1);
    Globals g;
    app.add_option("--seed", g.seed, "Random seed")->default_val(0);
    app.add_option("--out", g.out, "Output path");
    app.add_option("--frame", g.frame, "Frame size WxH");
    app.add_option("--nf", g.nf, "Feature dimension")->default_val(kDefaultFeatureDim)->check(CLI::PositiveNumber);

    // synth
    auto *synth = app.add_subcommand("synth", "Generate a synthetic ground-truth texton set");
    int synthK  = 9;
    std::string arrangement = "grid", masksOut, mapsOut;
    bool isotropic = false;
    synth->add_option("--k", synthK, "Number of textons")->default_val(9)->check(CLI::NonNegativeNumber);
    synth->add_option("--arrangement", arrangement, "grid or random")->check(CLI::IsMember({"grid", "random"}));
    synth->add_flag("--isotropic", isotropic, "Isotropic covariances");
    synth->add_option("--masks", masksOut, "Also write the segmentation masks (TXG1)");
    synth->add_option("--maps", mapsOut, "Also write the appearance/direction maps (TXG1)");

    // estimate
    auto *estimate = app.add_subcommand("estimate", "Estimate Gaussians from masks and maps");
    std::string masksIn, mapsIn;
    double temperature = 0.0;
    estimate->add_option("--masks", masksIn, "Segmentation masks [n,H,W] (TXG1)")->required();
    estimate->add_option("--maps", mapsIn, "Appearance and direction maps [H,W,d+2] (TXG1)")->required();
    estimate->add_option("--temperature", temperature, "Relaxed sampling temperature (0: rounded)");

    std::string input, inputB;

    auto *splatCmd = app.add_subcommand("splat", "Splat a set into a feature grid (TXG1)");
    splatCmd->add_option("set", input, "Texton document")->required();

    auto *renderCmd = app.add_subcommand("render", "Render a set to PNG or PPM");
    std::string projectionKind = "first3";
    renderCmd->add_option("set", input, "Texton document")->required();
    renderCmd->add_option("--projection", projectionKind, "first3 or random (seeded by --seed)")
        ->check(CLI::IsMember({"first3", "random"}));

    auto *reshuffleCmd = app.add_subcommand("reshuffle", "Permute appearance features");
    std::string mode = "hard";
    double gamma     = 0.5;
    reshuffleCmd->add_option("set", input, "Texton document")->required();
    reshuffleCmd->add_option("--mode", mode, "hard or soft")->check(CLI::IsMember({"hard", "soft"}));
    reshuffleCmd->add_option("--gamma", gamma, "Swap temperature")->check(CLI::NonNegativeNumber);

    auto *transferCmd = app.add_subcommand("transfer", "Transfer appearance between sets");
    transferCmd->require_subcommand(1);
    auto *transferMean    = transferCmd->add_subcommand("mean", "Align feature means");
    auto *transferReplaceCmd = transferCmd->add_subcommand("replace", "Replace features by random samples");
    for (auto *sub : {transferMean, transferReplaceCmd}) {
        sub->add_option("structure", input, "Structure document")->required();
        sub->add_option("appearance", inputB, "Appearance document")->required();
    }

    auto *varyCmd = app.add_subcommand("vary", "Scale feature and covariance variations");
    double df = 1.0, du = 1.0;
    varyCmd->add_option("set", input, "Texton document")->required();
    varyCmd->add_option("--df", df, "Feature variation scale")->check(CLI::NonNegativeNumber);
    varyCmd->add_option("--du", du, "Covariance variation scale")->check(CLI::NonNegativeNumber);

    auto *interpCmd = app.add_subcommand("interp", "Interpolate two sets");
    double eta      = 0.5;
    interpCmd->add_option("a", input, "First document")->required();
    interpCmd->add_option("b", inputB, "Second document")->required();
    interpCmd->add_option("--eta", eta, "Blend factor")->check(CLI::Range(0.0, 1.0));

    auto *morphCmd = app.add_subcommand("morph", "Spatially varying interpolation");
    std::string ramp = "lr", rampMap;
    morphCmd->add_option("a", input, "First document")->required();
    morphCmd->add_option("b", inputB, "Second document")->required();
    morphCmd->add_option("--ramp", ramp, "lr, tb or const")->check(CLI::IsMember({"lr", "tb", "const"}));
    morphCmd->add_option("--eta", eta, "Blend factor for --ramp const")->check(CLI::Range(0.0, 1.0));
    morphCmd->add_option("--map", rampMap, "Per-pixel ramp [H,W] (TXG1), overrides --ramp");

    auto *editCmd = app.add_subcommand("edit", "Move, scale or rotate one texton");
    editCmd->require_subcommand(1);
    std::size_t index = 0;
    std::string delta, matrix;
    double factor = 1.0, theta = 0.0;
    auto *editMove   = editCmd->add_subcommand("move", "Translate a texton");
    auto *editScale  = editCmd->add_subcommand("scale", "Scale a texton's covariance");
    auto *editRotate = editCmd->add_subcommand("rotate", "Rotate a texton about its mean");
    for (auto *sub : {editMove, editScale, editRotate}) {
        sub->add_option("set", input, "Texton document")->required();
        sub->add_option("--index", index, "Texton index")->required();
    }
    editMove->add_option("--delta", delta, "dx,dy")->required();
    auto *sOpt = editScale->add_option("--s", factor, "Uniform factor");
    auto *mOpt = editScale->add_option("--matrix", matrix, "a,b,c,d (row-major)");
    sOpt->excludes(mOpt);
    editRotate->add_option("--theta", theta, "Angle in radians")->required();

    auto *propagateCmd = app.add_subcommand("propagate", "Propagate an image edit to other textons");
    std::string original, edited, targets;
    double threshold = kDefaultEditThreshold;
    propagateCmd->add_option("--original", original, "Original image")->required();
    propagateCmd->add_option("--edited", edited, "Edited image")->required();
    propagateCmd->add_option("--set", input, "Texton document aligned with the original")->required();
    propagateCmd->add_option("--targets", targets, "Comma-separated texton indices")->required();
    propagateCmd->add_option("--threshold", threshold, "Per-channel change threshold");

    auto *mergeCmd = app.add_subcommand("merge", "Merge overlapping patch sets");
    std::vector<std::string> patchSpecs;
    double overlap = 0.0;
    mergeCmd->add_option("--patch", patchSpecs, "doc@x,y (repeatable)")->required();
    mergeCmd->add_option("--overlap", overlap, "Overlap width in pixels")->check(CLI::NonNegativeNumber);

    auto *rescaleCmd = app.add_subcommand("rescale", "Scale all textons about an anchor");
    std::string anchor = "0,0";
    rescaleCmd->add_option("set", input, "Texton document")->required();
    rescaleCmd->add_option("--s", factor, "Scale factor")->required()->check(CLI::PositiveNumber);
    rescaleCmd->add_option("--anchor", anchor, "x,y");

    auto *animateCmd = app.add_subcommand("animate", "Render a flow-field animation");
    animateCmd->require_subcommand(1);
    int frames = 10;
    double dt = 0.1, velocity = 0.2, duration = 1.0, omega = 0.0;
    std::string format = "png";
    auto *animShear  = animateCmd->add_subcommand("shear", "Perturbed shear flow");
    auto *animVortex = animateCmd->add_subcommand("vortex", "Vortex flow");
    for (auto *sub : {animShear, animVortex}) {
        sub->add_option("set", input, "Texton document")->required();
        sub->add_option("--frames", frames, "Frame count")->check(CLI::PositiveNumber);
        sub->add_option("--dt", dt, "Time step");
        sub->add_option("--format", format, "png or ppm")->check(CLI::IsMember({"png", "ppm"}));
    }
    animShear->add_option("--velocity", velocity, "Band velocity");
    animShear->add_option("--duration", duration, "Perturbation keyframe span")->check(CLI::PositiveNumber);
    animVortex->add_option("--omega", omega, "Angular velocity");

    auto *ccCmd = app.add_subcommand("cc", "Set matching cost between two documents");
    ccCmd->add_option("a", input, "First document")->required();
    ccCmd->add_option("b", inputB, "Second document")->required();

    auto *metricsCmd = app.add_subcommand("metrics", "Image distances and mask losses");
    std::string imageMask;
    metricsCmd->add_option("a", input, "First image");
    metricsCmd->add_option("b", inputB, "Second image");
    metricsCmd->add_option("--mask", imageMask, "Validity mask image (non-black = valid)");
    metricsCmd->add_option("--masks", masksIn, "Segmentation masks (TXG1) for entropy and compactness");

    auto *serveCmd = app.add_subcommand("serve", "Run the HTTP edit-session service");
    std::string addr = "127.0.0.1:8080";
    serveCmd->add_option("--addr", addr, "host:port");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        app.exit(e, err, err);
        err << app.help();
        return 2;
    }

    try {
        if (synth->parsed()) {
            SynthLayout layout;
            if (!g.frame.empty()) {
                layout.frame = parseFrame(g.frame);
            }
            layout.count       = synthK;
            layout.featureDim  = g.nf;
            layout.isotropic   = isotropic;
            layout.arrangement = arrangement == "random" ? SynthLayout::Arrangement::Random
                                                         : SynthLayout::Arrangement::Grid;
            const SynthWorld world = synthWorld(layout, g.seed);
            saveSet(world.truth, requireOut(g), Provenance{g.seed, "synth"});
            if (!masksOut.empty()) {
                writeFile(masksOut, encodeTensor(tensorFromMasks(world.masks)));
            }
            if (!mapsOut.empty()) {
                writeFile(mapsOut, encodeTensor(tensorFromMaps(world.maps)));
            }
        } else if (estimate->parsed()) {
            const SegmentationStack masks = masksFromTensor(decodeTensor(readFile(masksIn)));
            const DenseMaps maps          = mapsFromTensor(decodeTensor(readFile(mapsIn)));
            const SamplingMode sampling   = temperature > 0.0 ? SamplingMode::relaxed(temperature, g.seed)
                                                              : SamplingMode::rounded();
            saveSet(estimateGaussians(masks, maps, sampling), requireOut(g), Provenance{g.seed, "estimate"});
        } else if (splatCmd->parsed()) {
            const GaussianSet set = loadSet(input);
            writeFile(requireOut(g), encodeTensor(tensorFromGrid(splat<float>(set))));
        } else if (renderCmd->parsed()) {
            const GaussianSet set = loadSet(input);
            const ImageFrame size = g.frame.empty() ? set.frame : parseFrame(g.frame);
            const Projection projection =
                projectionKind == "random" ? Projection::random(set.featureDim + 2, g.seed) : Projection::first3();
            writeImage(renderAtSize(set, size.width, size.height, projection), requireOut(g));
        } else if (reshuffleCmd->parsed()) {
            const TextonDocument doc = loadDocument(input);
            const auto plan          = ReshufflePlan::random(
                doc.set.size(), g.seed, mode == "hard" ? ReshufflePlan::Mode::Hard : ReshufflePlan::Mode::Soft, gamma);
            saveDerived(reshuffle(doc.set, plan), g, doc);
        } else if (transferMean->parsed() || transferReplaceCmd->parsed()) {
            const TextonDocument structure = loadDocument(input);
            const GaussianSet appearance   = loadSet(inputB);
            saveDerived(transferMean->parsed() ? transferMeanAlign(structure.set, appearance)
                                               : transferReplace(structure.set, appearance, g.seed),
                        g, structure);
        } else if (varyCmd->parsed()) {
            const TextonDocument doc = loadDocument(input);
            saveDerived(modifyVariations(doc.set, {df, du}), g, doc);
        } else if (interpCmd->parsed()) {
            const TextonDocument a = loadDocument(input);
            saveDerived(interpolate(a.set, loadSet(inputB), eta, g.seed), g, a);
        } else if (morphCmd->parsed()) {
            const TextonDocument a = loadDocument(input);
            MorphRamp r = ramp == "tb" ? MorphRamp::topToBottom()
                          : ramp == "const" ? MorphRamp::constant(eta)
                                            : MorphRamp::leftToRight();
            if (!rampMap.empty()) {
                const Tensor t = decodeTensor(readFile(rampMap));
                if (t.dims.size() != 2) {
                    throw Error("ramp map must have dims [H, W]");
                }
                r.kind = MorphRamp::Kind::Map;
                r.map.resize(t.dims[0], t.dims[1]);
                for (Eigen::Index y = 0; y < r.map.rows(); ++y) {
                    for (Eigen::Index x = 0; x < r.map.cols(); ++x) {
                        r.map(y, x) = t.data[std::size_t(y * r.map.cols() + x)];
                    }
                }
            }
            saveDerived(spatialMorph(a.set, loadSet(inputB), r, g.seed), g, a);
        } else if (editMove->parsed() || editScale->parsed() || editRotate->parsed()) {
            const TextonDocument doc = loadDocument(input);
            TextonOp op;
            if (editMove->parsed()) {
                const auto d = parseNumbers(delta, 2, "--delta");
                op           = MoveOp{Vec2(d[0], d[1])};
            } else if (editScale->parsed()) {
                if (!matrix.empty()) {
                    const auto m = parseNumbers(matrix, 4, "--matrix");
                    Mat2 mat;
                    mat << m[0], m[1], m[2], m[3];
                    op = ScaleOp::by(mat);
                } else {
                    op = ScaleOp::by(factor);
                }
            } else {
                op = RotateOp{theta};
            }
            saveDerived(transformTexton(doc.set, index, op), g, doc);
        } else if (propagateCmd->parsed()) {
            std::vector<std::size_t> list;
            for (double v : parseNumbers(targets, 0, "--targets")) {
                if (v < 0 || v != std::floor(v)) {
                    throw UsageError("--targets must be non-negative integers");
                }
                list.push_back(std::size_t(v));
            }
            writeImage(propagateEdit(readImage(original), readImage(edited), loadSet(input), list, threshold),
                       requireOut(g));
        } else if (mergeCmd->parsed()) {
            std::vector<PatchPlacement> patches;
            for (const std::string &spec : patchSpecs) {
                const auto at = spec.rfind('@');
                if (at == std::string::npos) {
                    throw UsageError("--patch must look like doc@x,y, got '" + spec + "'");
                }
                const auto xy = parseNumbers(spec.substr(at + 1), 2, "--patch offset");
                patches.push_back({loadSet(spec.substr(0, at)), Vec2(xy[0], xy[1])});
            }
            saveSet(mergePatchSets(patches, overlap), requireOut(g), std::nullopt);
        } else if (rescaleCmd->parsed()) {
            const TextonDocument doc = loadDocument(input);
            const auto a             = parseNumbers(anchor, 2, "--anchor");
            saveDerived(rescaleGaussians(doc.set, factor, Vec2(a[0], a[1])), g, doc);
        } else if (animShear->parsed() || animVortex->parsed()) {
            const GaussianSet set = loadSet(input);
            Flow flow;
            if (animShear->parsed()) {
                flow = makeShearFlow(velocity, duration, g.seed);
            } else {
                flow = VortexFlow{omega};
            }
            const auto images = animate(set, flow, frames, dt);
            const auto paths  = writeFrames(images, requireOut(g), "frame",
                                            format == "png" ? ImageFormat::Png : ImageFormat::Ppm);
            out << "frames=" << paths.size() << "\n";
        } else if (ccCmd->parsed()) {
            out << formatReport({{"cc", cycleConsistency(loadSet(input), loadSet(inputB))}});
        } else if (metricsCmd->parsed()) {
            std::vector<std::pair<std::string, double>> report;
            if (!input.empty() || !inputB.empty()) {
                if (input.empty() || inputB.empty()) {
                    throw UsageError("metrics needs two images");
                }
                const RgbImage a = readImage(input), b = readImage(inputB);
                PixelMask mask;
                if (!imageMask.empty()) {
                    const RgbImage m = readImage(imageMask);
                    mask.width       = m.width;
                    mask.height      = m.height;
                    for (int y = 0; y < m.height; ++y) {
                        for (int x = 0; x < m.width; ++x) {
                            mask.data.push_back(m.at(x, y, 0) + m.at(x, y, 1) + m.at(x, y, 2) > 0.0);
                        }
                    }
                }
                const PixelMask *mp           = imageMask.empty() ? nullptr : &mask;
                const DistanceReport recon    = reconstructionDistance(a, b, mp);
                report.emplace_back("reconstruction", recon.value);
                report.emplace_back("perceptual", pyramidL1Distance(a, b, mp));
                report.emplace_back("degenerate_mask", recon.degenerateMask ? 1.0 : 0.0);
                report.emplace_back("texture", textureDistance(a, b, 4, 64, g.seed));
            }
            if (!masksIn.empty()) {
                const SegmentationStack masks = masksFromTensor(decodeTensor(readFile(masksIn)));
                report.emplace_back("entropy", entropyLoss(masks));
                report.emplace_back("compactness", compactnessLoss(masks));
            }
            if (report.empty()) {
                throw UsageError("metrics needs two images and/or --masks");
            }
            out << formatReport(report);
        } else if (serveCmd->parsed()) {
            const auto [host, port] = parseAddress(addr);
            EditService service;
            HttpServer server(service);
            const int bound = server.bind(host, port);
            out << "listening on " << host << ":" << bound << std::endl;
            server.serve();
        }
    } catch (const UsageError &e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError &e) {
        err << "error: " << e.what() << "\n";
        for (const auto &v : e.violations()) {
            err << "  " << v << "\n";
        }
        return 1;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

} // namespace texton
