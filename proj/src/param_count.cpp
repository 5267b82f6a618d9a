// Copyright 2026 The tsep Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tsep/param_count.hpp"

#include <sstream>

namespace tsep {

Table1Counts count_table1(std::uint64_t width, std::uint64_t kernel) {
  if (width % 2 != 0) throw ConfigError("count_table1: even split needs an even width");
  return count_table1(width, kernel, width / 2, width / 2);
}

Table1Counts count_table1(std::uint64_t width, std::uint64_t kernel, std::uint64_t attn_channels,
                          std::uint64_t conv_channels) {
  if (attn_channels + conv_channels != width) throw ConfigError("count_table1: Da + Dc must equal D");
  Table1Counts c;
  c.mha = 4 * width * width;
  c.sepconv = kernel * width + width * width;
  c.serial = kernel * width + 5 * width * width;
  c.parallel = 4 * attn_channels * attn_channels + kernel * conv_channels + conv_channels * conv_channels;
  return c;
}

std::uint64_t parallel_closed_form(std::uint64_t width, std::uint64_t kernel) {
  const std::uint64_t num = 5 * width * width + 2 * kernel * width;
  if (num % 4 != 0) throw ConfigError("parallel_closed_form: K/2 D + 5/4 D^2 is not integral here");
  return num / 4;
}

LayerCount count_layer(const CAConfig& cfg) {
  cfg.validate();
  const std::uint64_t da = cfg.attn_channels, dc = cfg.conv_channels, d = cfg.width, df = cfg.ffn_width;
  LayerCount c;
  c.attention = 4 * da * da;
  c.attention_norm = da > 0 ? 2 * da : 0;
  c.conv = dc > 0 ? cfg.kernel * dc + dc * dc : 0;
  c.conv_bias = dc;
  c.conv_norm = 2 * dc;
  c.ffn = d * df + df + df * d + d;
  c.out_norm = 2 * d;
  return c;
}

ParamReport count_model(const ModelConfig& cfg) {
  cfg.validate();
  const std::uint64_t d = cfg.width(), k = cfg.speakers, len = cfg.encoder.kernel;
  ParamReport r;
  r.encoder = d * len;
  r.preprocess = 2 * d + d * d + d;
  r.intra_layer = count_layer(cfg.intra);
  r.inter_layer = count_layer(cfg.inter);
  r.intra_sets_per_block = cfg.shared ? 1 : cfg.intra_repeats;
  r.inter_sets_per_block = cfg.shared ? 1 : cfg.inter_repeats;
  r.masking_layers = cfg.blocks * (r.intra_sets_per_block * r.intra_layer.total() +
                                   r.inter_sets_per_block * r.inter_layer.total());
  r.postprocess = d * d * k + d * k + 1;
  r.mask_head = 2 * (d * d + d);
  r.decoder = d * len;
  r.total_analytic = r.encoder + r.preprocess + r.masking_layers + r.postprocess + r.mask_head + r.decoder;
  r.table1_intra = count_table1(d, cfg.intra.kernel, cfg.intra.attn_channels, cfg.intra.conv_channels);
  r.table1_inter = count_table1(d, cfg.inter.kernel, cfg.inter.attn_channels, cfg.inter.conv_channels);
  return r;
}

template <typename T>
std::uint64_t count_empirical(const Model<T>& model) {
  return model.params().scalar_count();
}

template std::uint64_t count_empirical(const Model<float>&);
template std::uint64_t count_empirical(const Model<double>&);

namespace {

void layer_lines(std::ostream& os, const char* label, const LayerCount& c) {
  os << label << " layer: " << c.total() << "\n"
     << "  attention        " << c.attention << " (+" << c.attention_norm << " norm)\n"
     << "  sepconv          " << c.conv << " (+" << c.conv_bias << " bias, +" << c.conv_norm << " norm)\n"
     << "  feed-forward     " << c.ffn << "\n"
     << "  output norm      " << c.out_norm << "\n";
}

void layer_kv(std::ostream& os, const char* prefix, const LayerCount& c) {
  os << prefix << ".attention = " << c.attention << "\n"
     << prefix << ".attention_norm = " << c.attention_norm << "\n"
     << prefix << ".conv = " << c.conv << "\n"
     << prefix << ".conv_bias = " << c.conv_bias << "\n"
     << prefix << ".conv_norm = " << c.conv_norm << "\n"
     << prefix << ".ffn = " << c.ffn << "\n"
     << prefix << ".out_norm = " << c.out_norm << "\n"
     << prefix << ".total = " << c.total() << "\n";
}

void table1_kv(std::ostream& os, const char* prefix, const Table1Counts& t) {
  os << prefix << ".mha = " << t.mha << "\n"
     << prefix << ".sepconv = " << t.sepconv << "\n"
     << prefix << ".serial = " << t.serial << "\n"
     << prefix << ".parallel = " << t.parallel << "\n";
}

}  // namespace

std::string report_text(const ParamReport& r) {
  std::ostringstream os;
  os << "encoder            " << r.encoder << "\n"
     << "pre-processing     " << r.preprocess << "\n";
  layer_lines(os, "IntraCA", r.intra_layer);
  layer_lines(os, "InterCA", r.inter_layer);
  os << "unique layer sets  intra " << r.intra_sets_per_block << ", inter " << r.inter_sets_per_block
     << " per block\n"
     << "masking CA total   " << r.masking_layers << "\n"
     << "post-processing    " << r.postprocess << "\n"
     << "mask head          " << r.mask_head << "\n"
     << "decoder            " << r.decoder << "\n"
     << "total (analytic)   " << r.total_analytic << " (" << static_cast<double>(r.total_analytic) / 1e6 << "M)\n";
  if (r.total_empirical) os << "total (empirical)  " << r.total_empirical << "\n";
  os << "bias-free block counts (intra): mha " << r.table1_intra.mha << ", sepconv " << r.table1_intra.sepconv
     << ", serial " << r.table1_intra.serial << ", parallel " << r.table1_intra.parallel << "\n";
  return os.str();
}

std::string report_kv(const ParamReport& r) {
  std::ostringstream os;
  os << "encoder = " << r.encoder << "\n"
     << "preprocess = " << r.preprocess << "\n";
  layer_kv(os, "intra_layer", r.intra_layer);
  layer_kv(os, "inter_layer", r.inter_layer);
  os << "intra_sets_per_block = " << r.intra_sets_per_block << "\n"
     << "inter_sets_per_block = " << r.inter_sets_per_block << "\n"
     << "masking_layers = " << r.masking_layers << "\n"
     << "postprocess = " << r.postprocess << "\n"
     << "mask_head = " << r.mask_head << "\n"
     << "decoder = " << r.decoder << "\n"
     << "total_analytic = " << r.total_analytic << "\n"
     << "total_empirical = " << r.total_empirical << "\n";
  table1_kv(os, "table1_intra", r.table1_intra);
  table1_kv(os, "table1_inter", r.table1_inter);
  return os.str();
}

ModelConfig sepformer_config(std::size_t blocks, std::size_t repeats) {
  ModelConfig cfg;
  cfg.blocks = blocks;
  cfg.intra_repeats = repeats;
  cfg.inter_repeats = repeats;
  cfg.intra = CAConfig{256, 0, 256, 8, 51, 1024};
  cfg.inter = CAConfig{256, 0, 256, 8, 11, 1024};
  return cfg;
}

ModelConfig tiny_config(std::size_t blocks, std::size_t repeats, bool shared) {
  ModelConfig cfg;
  cfg.blocks = blocks;
  cfg.intra_repeats = repeats;
  cfg.inter_repeats = repeats;
  cfg.shared = shared;
  return cfg;
}

std::vector<SizePreset> size_presets() {
  return {
      {"sepformer-16", sepformer_config(2, 4), 13.0},
      {"sepformer-32 (2x8x8)", sepformer_config(2, 8), 25.7},
      {"sepformer-32 (4x4x4)", sepformer_config(4, 4), 25.7},
      {"tiny-16", tiny_config(2, 4, false), 10.2},
      {"tiny-32 (2x8x8)", tiny_config(2, 8, false), 20.0},
      {"tiny-32 (4x4x4)", tiny_config(4, 4, false), 20.0},
      {"tiny-shared-16", tiny_config(2, 4, true), 2.9},
      {"tiny-shared-32 (2x8x8)", tiny_config(2, 8, true), 2.9},
      {"tiny-shared-32 (4x4x4)", tiny_config(4, 4, true), 5.3},
  };
}

}  // namespace tsep
