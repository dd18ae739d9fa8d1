#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "convgemm/conv_params.hpp"

namespace convgemm {

// One line of a model file. Conv layers carry their complete geometry (the
// batch size is supplied at run time); fc layers are dense m x k products;
// pool layers are shape metadata only and carry no work.
struct LayerSpec {
    enum class Kind { Conv, Fc, Pool };

    Kind kind = Kind::Conv;
    ConvParams conv{};                           // Kind::Conv, conv.b is a placeholder 1
    index_t fc_m = 0, fc_k = 0;                  // Kind::Fc
    index_t pool_h = 0, pool_w = 0, pool_c = 0;  // Kind::Pool
};

struct ModelSpec {
    std::string name;
    std::vector<LayerSpec> layers;

    index_t count(LayerSpec::Kind kind) const;
};

// Plain text, one layer per line:
//   conv k_n k_h k_w c_i h_i w_i s p
//   fc   m k
//   pool h_o w_o c
// '#' starts a comment; blank lines are skipped. A model must contain at
// least one conv layer.
ModelSpec parse_model(const std::string& path);
ModelSpec parse_model(std::istream& in, const std::string& name);

// Largest explicit im2col workspace over the conv layers at batch size b.
index_t model_workspace_bytes(const ModelSpec& model, index_t batch);

}  // namespace convgemm
