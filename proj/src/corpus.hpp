#pragma once

#include "common.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace xrat {

// Reserved vocabulary ids. MASK is the literal word "*".
constexpr int kClsId = 0;
constexpr int kMaskId = 1;
constexpr int kPadId = 2;
constexpr int kUnkId = 3;
constexpr int kNumReservedIds = 4;

constexpr const char* kMaskWord = "*";

// Words longer than this are split into fixed-size chunks so the
// split-token / label-inheritance path is exercised without a learned
// sub-word model.
constexpr std::size_t kMaxWordChunk = 12;

// Canonical humanitarian label space (file-safe forms, canonical order).
const std::vector<std::string>& default_label_space();

class Vocab {
 public:
  Vocab();

  // Builds reserved ids plus the sorted unique sub-word chunks of `words`.
  static Vocab from_words(const std::vector<std::string>& words);

  int add(const std::string& token);        // returns existing id if present
  int id_of(const std::string& token) const;  // kUnkId when absent
  const std::string& token_of(int id) const;
  bool contains(const std::string& token) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const Vocab& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> index_;
};

struct TokenSeq {
  std::vector<int> token_ids;   // CLS first
  std::vector<int> word_index;  // per token; CLS has -1
  int n = 0;                    // token count excluding CLS
  int word_count = 0;

  bool operator==(const TokenSeq& o) const {
    return token_ids == o.token_ids && word_index == o.word_index && n == o.n &&
           word_count == o.word_count;
  }
};

struct PixelGrid {
  int height = 0;
  int width = 0;
  int channels = 0;                 // 1 or 3
  std::vector<double> pixels;       // row-major (y, x, c), values in [0,1]

  double at(int y, int x, int c) const {
    return pixels[static_cast<std::size_t>((y * width + x) * channels + c)];
  }
  double& at(int y, int x, int c) {
    return pixels[static_cast<std::size_t>((y * width + x) * channels + c)];
  }
};

struct PatchGrid {
  int patch_size = 0;   // P
  int channels = 0;     // C
  int grid_rows = 0;
  int grid_cols = 0;
  // m x (P*P*C), row-major over the patch grid; within a patch (py, px, c).
  std::vector<std::vector<double>> patches;

  int m() const { return grid_rows * grid_cols; }
  int patch_dim() const { return patch_size * patch_size * channels; }

  bool operator==(const PatchGrid& o) const {
    return patch_size == o.patch_size && channels == o.channels &&
           grid_rows == o.grid_rows && grid_cols == o.grid_cols && patches == o.patches;
  }
};

struct Instance {
  std::string id;
  std::vector<std::string> words;
  PatchGrid patch_grid;
  int label = 0;  // index into the dataset label space
  std::optional<std::vector<int>> gold_word_rationales;  // 0/1 per word

  bool operator==(const Instance& o) const {
    return id == o.id && words == o.words && patch_grid == o.patch_grid &&
           label == o.label && gold_word_rationales == o.gold_word_rationales;
  }
};

struct Dataset {
  std::vector<Instance> instances;
  std::vector<std::string> label_space;
  Vocab vocab;

  // Recomputes the vocab from all instance words (sorted unique chunks).
  void rebuild_vocab();

  bool operator==(const Dataset& o) const {
    return instances == o.instances && label_space == o.label_space && vocab == o.vocab;
  }
};

// Deterministic sub-word split: chunks of at most kMaxWordChunk characters.
std::vector<std::string> split_word(const std::string& word);

// Whitespace-normalizes, splits into words. Throws validation_error if empty.
std::vector<std::string> split_text(const std::string& text);

TokenSeq tokenize_words(const std::vector<std::string>& words, const Vocab& vocab);
TokenSeq tokenize(const std::string& text, const Vocab& vocab);

// Word labels -> token labels; split tokens inherit the word label, CLS gets 0.
std::vector<int> word_labels_to_token_labels(const std::vector<int>& word_labels,
                                             const TokenSeq& tokens);

PatchGrid patchify(const PixelGrid& img, int patch_size);
PixelGrid unpatchify(const PatchGrid& grid);

// Bilinear resize so the shorter edge hits `short_target` with the longer
// edge capped at `long_cap`, then center-crop both edges to multiples of P.
PixelGrid resize_and_crop(const PixelGrid& img, int patch_size,
                          int short_target = 384, int long_cap = 640);

PixelGrid load_ppm(const std::string& path);
void save_pgm(const std::string& path, int rows, int cols,
              const std::vector<double>& values01);

// JSON Lines dataset I/O. When `label_space` is empty it is inferred from the
// file: the canonical five-class space if every label matches it, a
// class_NN range when labels look generated, otherwise sorted unique labels.
Dataset load_jsonl(const std::string& path,
                   const std::vector<std::string>& label_space = {});
void save_jsonl(const Dataset& dataset, const std::string& path);

std::string instance_to_json_line(const Instance& inst,
                                  const std::vector<std::string>& label_space);

}  // namespace xrat
