#include "convgemm/model.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "convgemm/im2col.hpp"

namespace convgemm {

namespace {

index_t parse_field(std::istringstream& in, int line_no, const char* what) {
    long long value = 0;
    if (!(in >> value))
        throw ParseError(line_no, std::string("missing or malformed ") + what);
    return static_cast<index_t>(value);
}

void expect_end(std::istringstream& in, int line_no) {
    std::string extra;
    if (in >> extra)
        throw ParseError(line_no, "trailing token '" + extra + "'");
}

}  // namespace

index_t ModelSpec::count(LayerSpec::Kind kind) const {
    return static_cast<index_t>(
        std::count_if(layers.begin(), layers.end(),
                      [kind](const LayerSpec& l) { return l.kind == kind; }));
}

ModelSpec parse_model(std::istream& in, const std::string& name) {
    ModelSpec model;
    model.name = name;

    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream fields(line);
        std::string kind;
        if (!(fields >> kind)) continue;  // blank or comment-only line

        LayerSpec layer;
        if (kind == "conv") {
            layer.kind = LayerSpec::Kind::Conv;
            ConvParams& cp = layer.conv;
            cp.k_n = parse_field(fields, line_no, "k_n");
            cp.k_h = parse_field(fields, line_no, "k_h");
            cp.k_w = parse_field(fields, line_no, "k_w");
            cp.c_i = parse_field(fields, line_no, "c_i");
            cp.h_i = parse_field(fields, line_no, "h_i");
            cp.w_i = parse_field(fields, line_no, "w_i");
            cp.s = parse_field(fields, line_no, "s");
            cp.p = parse_field(fields, line_no, "p");
            cp.b = 1;
            try {
                output_dims(cp);
            } catch (const InvalidGeometry& e) {
                throw ParseError(line_no, e.what());
            }
        } else if (kind == "fc") {
            layer.kind = LayerSpec::Kind::Fc;
            layer.fc_m = parse_field(fields, line_no, "m");
            layer.fc_k = parse_field(fields, line_no, "k");
            if (layer.fc_m < 1 || layer.fc_k < 1)
                throw ParseError(line_no, "fc dimensions must be positive");
        } else if (kind == "pool") {
            layer.kind = LayerSpec::Kind::Pool;
            layer.pool_h = parse_field(fields, line_no, "h_o");
            layer.pool_w = parse_field(fields, line_no, "w_o");
            layer.pool_c = parse_field(fields, line_no, "c");
            if (layer.pool_h < 1 || layer.pool_w < 1 || layer.pool_c < 1)
                throw ParseError(line_no, "pool dimensions must be positive");
        } else {
            throw UnknownLayerKind(line_no, kind);
        }
        expect_end(fields, line_no);
        model.layers.push_back(layer);
    }

    if (model.count(LayerSpec::Kind::Conv) == 0)
        throw ParseError(line_no, "model contains no conv layer");
    return model;
}

ModelSpec parse_model(const std::string& path) {
    std::ifstream file(path);
    if (!file)
        throw IoError("cannot open model file '" + path + "'");
    return parse_model(file, std::filesystem::path(path).stem().string());
}

index_t model_workspace_bytes(const ModelSpec& model, index_t batch) {
    if (batch < 1)
        throw InvalidGeometry("batch must be positive");
    index_t worst = 0;
    for (const LayerSpec& layer : model.layers) {
        if (layer.kind != LayerSpec::Kind::Conv) continue;
        ConvParams cp = layer.conv;
        cp.b = batch;
        worst = std::max(worst, im2col_workspace_bytes(cp));
    }
    return worst;
}

}  // namespace convgemm
