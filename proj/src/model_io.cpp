// Model file layout (version 1), all multi-byte values little-endian:
//
//   offset 0   magic "EPAT" (4 bytes)
//   offset 4   uint32 format version
//   offset 8   uint64 header byte length H
//   offset 16  UTF-8 JSON header (H bytes): classifier kind, preprocessing
//              flags, provenance, and an ordered "arrays" list of
//              {name, length} descriptors
//   offset 16+H  the declared float64 arrays, concatenated in header order
//
// Matrices are stored column-major. Class labels are stored as float64
// 0/1/2 so the payload is uniformly float64.

#include <cstring>
#include <fstream>
#include <map>

#include <nlohmann/json.hpp>

#include "eigenpattern/classify.hpp"
#include "eigenpattern/errors.hpp"

namespace eigenpattern {
namespace {

constexpr char kMagic[4] = {'E', 'P', 'A', 'T'};
constexpr std::uint32_t kVersion = 1;

using json = nlohmann::json;

struct ArraySpec {
    std::string name;
    std::vector<double> data;
};

std::vector<double> matrix_to_vec(const DenseMatrix& m) {
    return {m.data(), m.data() + m.size()};
}

DenseMatrix vec_to_matrix(const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols) {
    if (static_cast<Eigen::Index>(v.size()) != rows * cols) {
        throw FormatError("model file: array length does not match declared matrix shape");
    }
    return Eigen::Map<const DenseMatrix>(v.data(), rows, cols);
}

std::vector<double> labels_to_vec(const std::vector<PatternClass>& labels) {
    std::vector<double> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) out[i] = static_cast<double>(labels[i]);
    return out;
}

std::vector<PatternClass> vec_to_labels(const std::vector<double>& v) {
    std::vector<PatternClass> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const int c = static_cast<int>(v[i]);
        if (c < 0 || c > 2 || v[i] != c) throw FormatError("model file: invalid label value");
        out[i] = static_cast<PatternClass>(c);
    }
    return out;
}

}  // namespace

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    json header;
    std::vector<ArraySpec> arrays;

    header["use_fft"] = model.preprocessing.use_fft;
    header["normalized"] = model.preprocessing.normalization.has_value();
    header["basis_rows"] = model.basis.rows();
    header["basis_cols"] = model.basis.cols();
    header["provenance"] = {{"seed", model.provenance.seed},
                            {"target_rank", model.provenance.target_rank},
                            {"truncation_rank", model.provenance.truncation_rank},
                            {"dataset_digest", model.provenance.dataset_digest}};

    arrays.push_back({"basis", matrix_to_vec(model.basis)});
    if (model.preprocessing.normalization) {
        const auto& stats = *model.preprocessing.normalization;
        arrays.push_back({"norm_mean", {stats.mean.data(), stats.mean.data() + stats.mean.size()}});
        arrays.push_back(
            {"norm_std", {stats.stddev.data(), stats.stddev.data() + stats.stddev.size()}});
    }

    std::visit(
        [&](const auto& state) {
            using T = std::decay_t<decltype(state)>;
            if constexpr (std::is_same_v<T, KnnState>) {
                header["classifier"] = "knn";
                header["neighbor_count"] = state.neighbor_count;
                header["train_rows"] = state.train_coords.rows();
                header["train_cols"] = state.train_coords.cols();
                arrays.push_back({"train_coords", matrix_to_vec(state.train_coords)});
                arrays.push_back({"train_labels", labels_to_vec(state.train_labels)});
            } else if constexpr (std::is_same_v<T, TreeState>) {
                header["classifier"] = "tree";
                header["max_depth"] = state.max_depth;
                header["min_leaf"] = state.min_leaf;
                header["node_count"] = state.nodes.size();
                std::vector<double> flat;
                flat.reserve(state.nodes.size() * 5);
                for (const auto& n : state.nodes) {
                    flat.push_back(n.feature);
                    flat.push_back(n.threshold);
                    flat.push_back(n.label);
                    flat.push_back(n.left);
                    flat.push_back(n.right);
                }
                arrays.push_back({"tree_nodes", std::move(flat)});
            } else if constexpr (std::is_same_v<T, GnbState>) {
                header["classifier"] = "gnb";
                header["feature_count"] = state.means.cols();
                arrays.push_back({"class_means", matrix_to_vec(state.means)});
                arrays.push_back({"class_variances", matrix_to_vec(state.variances)});
                arrays.push_back({"priors", {state.priors.data(), state.priors.data() + 3}});
            } else {
                header["classifier"] = "lda";
                header["feature_count"] = state.means.cols();
                arrays.push_back({"class_means", matrix_to_vec(state.means)});
                arrays.push_back({"cov_inv", matrix_to_vec(state.cov_inv)});
                arrays.push_back({"priors", {state.priors.data(), state.priors.data() + 3}});
            }
        },
        model.classifier);

    json descriptors = json::array();
    for (const auto& a : arrays) {
        descriptors.push_back({{"name", a.name}, {"length", a.data.size()}});
    }
    header["arrays"] = descriptors;

    const std::string header_text = header.dump();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write model file " + path.string());
    out.write(kMagic, 4);
    const std::uint32_t version = kVersion;
    out.write(reinterpret_cast<const char*>(&version), sizeof(version));
    const std::uint64_t header_len = header_text.size();
    out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
    out.write(header_text.data(), static_cast<std::streamsize>(header_text.size()));
    for (const auto& a : arrays) {
        out.write(reinterpret_cast<const char*>(a.data.data()),
                  static_cast<std::streamsize>(a.data.size() * sizeof(double)));
    }
    if (!out) throw IoError("write failed for model file " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open model file " + path.string());

    char magic[4];
    in.read(magic, 4);
    if (in.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError("model file " + path.string() + ": bad magic bytes");
    }
    std::uint32_t version = 0;
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    if (!in || version != kVersion) {
        throw FormatError("model file " + path.string() + ": unsupported version " +
                          std::to_string(version));
    }
    std::uint64_t header_len = 0;
    in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
    if (!in) throw FormatError("model file " + path.string() + ": truncated header length");
    std::string header_text(header_len, '\0');
    in.read(header_text.data(), static_cast<std::streamsize>(header_len));
    if (static_cast<std::uint64_t>(in.gcount()) != header_len) {
        throw FormatError("model file " + path.string() + ": truncated header");
    }

    json header;
    try {
        header = json::parse(header_text);
    } catch (const json::exception& e) {
        throw FormatError("model file " + path.string() + ": malformed header: " + e.what());
    }

    std::map<std::string, std::vector<double>> arrays;
    for (const auto& desc : header.at("arrays")) {
        const std::string name = desc.at("name");
        const std::uint64_t length = desc.at("length");
        std::vector<double> data(length);
        in.read(reinterpret_cast<char*>(data.data()),
                static_cast<std::streamsize>(length * sizeof(double)));
        if (static_cast<std::uint64_t>(in.gcount()) != length * sizeof(double)) {
            throw FormatError("model file " + path.string() + ": truncated array '" + name + "'");
        }
        arrays.emplace(name, std::move(data));
    }

    try {
        TrainedModel model;
        model.preprocessing.use_fft = header.at("use_fft");
        model.basis = vec_to_matrix(arrays.at("basis"), header.at("basis_rows"),
                                    header.at("basis_cols"));
        if (header.at("normalized").get<bool>()) {
            NormalizationStats stats;
            const auto& mean = arrays.at("norm_mean");
            const auto& stddev = arrays.at("norm_std");
            stats.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
            stats.stddev =
                Eigen::Map<const Vector>(stddev.data(), static_cast<Eigen::Index>(stddev.size()));
            model.preprocessing.normalization = std::move(stats);
        }
        const auto& prov = header.at("provenance");
        model.provenance.seed = prov.at("seed");
        model.provenance.target_rank = prov.at("target_rank");
        model.provenance.truncation_rank = prov.at("truncation_rank");
        model.provenance.dataset_digest = prov.at("dataset_digest");

        const std::string kind = header.at("classifier");
        if (kind == "knn") {
            KnnState knn;
            knn.neighbor_count = header.at("neighbor_count");
            knn.train_coords = vec_to_matrix(arrays.at("train_coords"), header.at("train_rows"),
                                             header.at("train_cols"));
            knn.train_labels = vec_to_labels(arrays.at("train_labels"));
            model.classifier = std::move(knn);
        } else if (kind == "tree") {
            TreeState tree;
            tree.max_depth = header.at("max_depth");
            tree.min_leaf = header.at("min_leaf");
            const auto& flat = arrays.at("tree_nodes");
            const std::size_t count = header.at("node_count");
            if (flat.size() != count * 5) throw FormatError("model file: bad tree node array");
            tree.nodes.resize(count);
            for (std::size_t i = 0; i < count; ++i) {
                tree.nodes[i].feature = static_cast<int>(flat[5 * i + 0]);
                tree.nodes[i].threshold = flat[5 * i + 1];
                tree.nodes[i].label = static_cast<int>(flat[5 * i + 2]);
                tree.nodes[i].left = static_cast<int>(flat[5 * i + 3]);
                tree.nodes[i].right = static_cast<int>(flat[5 * i + 4]);
            }
            model.classifier = std::move(tree);
        } else if (kind == "gnb") {
            GnbState gnb;
            const Eigen::Index r = header.at("feature_count");
            gnb.means = vec_to_matrix(arrays.at("class_means"), 3, r);
            gnb.variances = vec_to_matrix(arrays.at("class_variances"), 3, r);
            const auto& priors = arrays.at("priors");
            gnb.priors = Eigen::Vector3d(priors.at(0), priors.at(1), priors.at(2));
            model.classifier = std::move(gnb);
        } else if (kind == "lda") {
            LdaState lda;
            const Eigen::Index r = header.at("feature_count");
            lda.means = vec_to_matrix(arrays.at("class_means"), 3, r);
            lda.cov_inv = vec_to_matrix(arrays.at("cov_inv"), r, r);
            const auto& priors = arrays.at("priors");
            lda.priors = Eigen::Vector3d(priors.at(0), priors.at(1), priors.at(2));
            model.classifier = std::move(lda);
        } else {
            throw FormatError("model file " + path.string() + ": unknown classifier '" + kind + "'");
        }
        return model;
    } catch (const json::exception& e) {
        throw FormatError("model file " + path.string() + ": incomplete header: " + e.what());
    } catch (const std::out_of_range& e) {
        throw FormatError("model file " + path.string() + ": missing array: " + e.what());
    }
}

}  // namespace eigenpattern
