#include "synth.hpp"

#include "rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace xrat {

using nlohmann::json;

void SynthConfig::validate() const {
  if (n_classes < 2) throw validation_error("synth: n_classes must be >= 2");
  if (n_instances < 1) throw validation_error("synth: n_instances must be >= 1");
  if (signature_tokens_per_class < 1)
    throw validation_error("synth: signature_tokens_per_class must be >= 1");
  if (words_per_instance < 2)
    throw validation_error("synth: words_per_instance must be >= 2");
  if (grid_rows < 1 || grid_cols < 1)
    throw validation_error("synth: grid dimensions must be positive");
  if (patch_size < 1) throw validation_error("synth: patch_size must be >= 1");
  if (channels != 1 && channels != 3)
    throw validation_error("synth: channels must be 1 or 3");
  if (signature_patches_per_class < 1)
    throw validation_error("synth: signature_patches_per_class must be >= 1");
  if (noise_std < 0.0) throw validation_error("synth: noise_std must be >= 0");
  const int signature_words = n_classes * signature_tokens_per_class;
  if (vocab_size <= signature_words)
    throw validation_error(
        "synth: vocab_size " + std::to_string(vocab_size) +
        " is too small for " + std::to_string(signature_words) +
        " disjoint signature words plus at least one filler word");
  if (grid_rows * grid_cols < 2)
    throw validation_error("synth: grid must hold a signature patch plus noise");
}

namespace {

std::string filler_word(int i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "w%03d", i);
  return buf;
}

std::string signature_word(int cls, int i) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "sig%d_%c", cls, static_cast<char>('a' + i));
  return buf;
}

std::string class_name(const SynthConfig& cfg, int cls) {
  if (cfg.n_classes == static_cast<int>(default_label_space().size()))
    return default_label_space()[static_cast<std::size_t>(cls)];
  char buf[16];
  std::snprintf(buf, sizeof(buf), "class_%02d", cls);
  return buf;
}

// Nonnegative unit-norm prototype; entries land in [0,1] without clamping.
std::vector<double> draw_prototype(Rng& rng, int dim) {
  std::vector<double> v(static_cast<std::size_t>(dim));
  double norm_sq = 0.0;
  for (auto& x : v) {
    x = std::fabs(rng.normal());
    norm_sq += x * x;
  }
  const double inv = 1.0 / std::sqrt(std::max(norm_sq, 1e-30));
  for (auto& x : v) x = quantize_g9(x * inv);
  return v;
}

// Distinct random cells via partial Fisher-Yates.
std::vector<int> sample_cells(Rng& rng, int m, int count) {
  std::vector<int> cells(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) cells[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(m - i)));
    std::swap(cells[static_cast<std::size_t>(i)], cells[static_cast<std::size_t>(j)]);
  }
  cells.resize(static_cast<std::size_t>(count));
  std::sort(cells.begin(), cells.end());
  return cells;
}

}  // namespace

std::vector<std::string> synth_signature_words(const SynthConfig& cfg, int cls) {
  std::vector<std::string> out;
  for (int i = 0; i < cfg.signature_tokens_per_class; ++i)
    out.push_back(signature_word(cls, i));
  return out;
}

SynthResult synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);

  const int n_filler = cfg.vocab_size - cfg.n_classes * cfg.signature_tokens_per_class;
  const int m = cfg.grid_rows * cfg.grid_cols;
  const int patch_dim = cfg.patch_size * cfg.patch_size * cfg.channels;
  // At least one noise patch stays in every grid.
  const int max_planted = std::min(cfg.signature_patches_per_class + 1, m - 1);

  // Prototypes are drawn once, before any instance, so they are shared by
  // every slice of the stream.
  std::vector<std::vector<std::vector<double>>> prototypes(
      static_cast<std::size_t>(cfg.n_classes));
  for (int cls = 0; cls < cfg.n_classes; ++cls)
    for (int p = 0; p < cfg.signature_patches_per_class; ++p)
      prototypes[static_cast<std::size_t>(cls)].push_back(draw_prototype(rng, patch_dim));

  SynthResult result;
  Dataset& ds = result.dataset;
  for (int cls = 0; cls < cfg.n_classes; ++cls) ds.label_space.push_back(class_name(cfg, cls));

  for (int i = 0; i < cfg.n_instances; ++i) {
    Instance inst;
    char idbuf[24];
    std::snprintf(idbuf, sizeof(idbuf), "synth_%06d", i);
    inst.id = idbuf;
    inst.label = static_cast<int>(rng.below(static_cast<std::uint64_t>(cfg.n_classes)));

    // Text: 1..signature_tokens_per_class distinct signature words of the
    // label class at random positions, fillers elsewhere.
    const int max_sig_words =
        std::min(cfg.signature_tokens_per_class, cfg.words_per_instance - 1);
    const int n_sig_words = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_sig_words)));
    std::vector<int> sig_ids(static_cast<std::size_t>(cfg.signature_tokens_per_class));
    for (int s = 0; s < cfg.signature_tokens_per_class; ++s)
      sig_ids[static_cast<std::size_t>(s)] = s;
    rng.shuffle(sig_ids);
    sig_ids.resize(static_cast<std::size_t>(n_sig_words));

    std::vector<int> positions(static_cast<std::size_t>(cfg.words_per_instance));
    for (int p = 0; p < cfg.words_per_instance; ++p)
      positions[static_cast<std::size_t>(p)] = p;
    rng.shuffle(positions);

    inst.words.assign(static_cast<std::size_t>(cfg.words_per_instance), "");
    std::vector<int> rationale(static_cast<std::size_t>(cfg.words_per_instance), 0);
    for (int s = 0; s < n_sig_words; ++s) {
      const int pos = positions[static_cast<std::size_t>(s)];
      inst.words[static_cast<std::size_t>(pos)] =
          signature_word(inst.label, sig_ids[static_cast<std::size_t>(s)]);
      rationale[static_cast<std::size_t>(pos)] = 1;
    }
    for (int p = 0; p < cfg.words_per_instance; ++p) {
      auto& w = inst.words[static_cast<std::size_t>(p)];
      if (w.empty())
        w = filler_word(static_cast<int>(rng.below(static_cast<std::uint64_t>(n_filler))));
    }
    inst.gold_word_rationales = rationale;

    // Patches: planted prototypes at distinct cells, Gaussian noise elsewhere.
    const int n_sig_patches =
        1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_planted)));
    const std::vector<int> cells = sample_cells(rng, m, n_sig_patches);

    PatchGrid& g = inst.patch_grid;
    g.patch_size = cfg.patch_size;
    g.channels = cfg.channels;
    g.grid_rows = cfg.grid_rows;
    g.grid_cols = cfg.grid_cols;
    g.patches.assign(static_cast<std::size_t>(m), {});
    std::size_t next_cell = 0;
    for (int k = 0; k < m; ++k) {
      auto& patch = g.patches[static_cast<std::size_t>(k)];
      if (next_cell < cells.size() && cells[next_cell] == k) {
        const int proto = static_cast<int>(
            rng.below(static_cast<std::uint64_t>(cfg.signature_patches_per_class)));
        patch = prototypes[static_cast<std::size_t>(inst.label)][static_cast<std::size_t>(proto)];
        ++next_cell;
      } else {
        patch.resize(static_cast<std::size_t>(patch_dim));
        for (auto& v : patch)
          v = quantize_g9(std::max(0.0, std::min(1.0, rng.normal() * cfg.noise_std)));
      }
    }

    result.gold.signature_patches[inst.id] = cells;
    ds.instances.push_back(std::move(inst));
  }

  ds.rebuild_vocab();
  return result;
}

void save_gold_patches(const SynthGold& gold, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw runtime_failure("cannot write gold patches file: " + path);
  for (const auto& [id, cells] : gold.signature_patches) {
    out << "{\"id\": " << json(id).dump() << ", \"signature_patches\": [";
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ", ";
      out << cells[i];
    }
    out << "]}\n";
  }
}

SynthGold load_gold_patches(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open gold patches file: " + path);
  SynthGold gold;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      gold.signature_patches[j.at("id").get<std::string>()] =
          j.at("signature_patches").get<std::vector<int>>();
    } catch (const json::exception& e) {
      throw validation_error(path + ": malformed gold record on line " +
                             std::to_string(line_no) + ": " + e.what());
    }
  }
  return gold;
}

}  // namespace xrat
