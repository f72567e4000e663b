#include "corpus.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace xrat {

using nlohmann::json;

const std::vector<std::string>& default_label_space() {
  static const std::vector<std::string> kLabels = {
      "infrastructure_damage", "affected_individuals", "rescue_effort",
      "other_relevant_info",   "not_humanitarian",
  };
  return kLabels;
}

Vocab::Vocab() {
  tokens_ = {"[CLS]", kMaskWord, "[PAD]", "[UNK]"};
  for (int i = 0; i < kNumReservedIds; ++i) index_[tokens_[i]] = i;
}

Vocab Vocab::from_words(const std::vector<std::string>& words) {
  std::set<std::string> chunks;
  for (const auto& w : words) {
    for (const auto& c : split_word(w)) chunks.insert(c);
  }
  Vocab v;
  for (const auto& c : chunks) v.add(c);
  return v;
}

int Vocab::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const int id = static_cast<int>(tokens_.size());
  tokens_.push_back(token);
  index_[token] = id;
  return id;
}

int Vocab::id_of(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocab::token_of(int id) const {
  if (id < 0 || id >= size()) throw validation_error("token id out of range");
  return tokens_[static_cast<std::size_t>(id)];
}

bool Vocab::contains(const std::string& token) const {
  return index_.count(token) > 0;
}

void Dataset::rebuild_vocab() {
  std::vector<std::string> all;
  for (const auto& inst : instances)
    all.insert(all.end(), inst.words.begin(), inst.words.end());
  vocab = Vocab::from_words(all);
}

std::vector<std::string> split_word(const std::string& word) {
  std::vector<std::string> chunks;
  if (word.size() <= kMaxWordChunk) {
    chunks.push_back(word);
    return chunks;
  }
  for (std::size_t pos = 0; pos < word.size(); pos += kMaxWordChunk)
    chunks.push_back(word.substr(pos, kMaxWordChunk));
  return chunks;
}

std::vector<std::string> split_text(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : text) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v') {
      if (!cur.empty()) {
        words.push_back(cur);
        cur.clear();
      }
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) words.push_back(cur);
  if (words.empty())
    throw validation_error("text is empty after whitespace normalization");
  return words;
}

TokenSeq tokenize_words(const std::vector<std::string>& words, const Vocab& vocab) {
  if (words.empty()) throw validation_error("cannot tokenize an empty word list");
  TokenSeq seq;
  seq.token_ids.push_back(kClsId);
  seq.word_index.push_back(-1);
  for (std::size_t w = 0; w < words.size(); ++w) {
    for (const auto& chunk : split_word(words[w])) {
      seq.token_ids.push_back(vocab.id_of(chunk));
      seq.word_index.push_back(static_cast<int>(w));
    }
  }
  seq.n = static_cast<int>(seq.token_ids.size()) - 1;
  seq.word_count = static_cast<int>(words.size());
  return seq;
}

TokenSeq tokenize(const std::string& text, const Vocab& vocab) {
  return tokenize_words(split_text(text), vocab);
}

std::vector<int> word_labels_to_token_labels(const std::vector<int>& word_labels,
                                             const TokenSeq& tokens) {
  if (static_cast<int>(word_labels.size()) != tokens.word_count)
    throw validation_error("word label count " + std::to_string(word_labels.size()) +
                           " does not match word count " +
                           std::to_string(tokens.word_count));
  std::vector<int> out(tokens.token_ids.size(), 0);
  for (std::size_t t = 0; t < tokens.token_ids.size(); ++t) {
    const int w = tokens.word_index[t];
    if (w >= 0) out[t] = word_labels[static_cast<std::size_t>(w)];
  }
  return out;
}

PatchGrid patchify(const PixelGrid& img, int patch_size) {
  if (patch_size <= 0) throw validation_error("patch size must be positive");
  if (img.height <= 0 || img.width <= 0)
    throw validation_error("image has empty dimensions");
  if (img.channels != 1 && img.channels != 3)
    throw validation_error("image must have 1 or 3 channels");
  if (img.height % patch_size != 0 || img.width % patch_size != 0)
    throw validation_error("image " + std::to_string(img.height) + "x" +
                           std::to_string(img.width) +
                           " is not divisible by patch size " +
                           std::to_string(patch_size) + "; crop first");
  PatchGrid grid;
  grid.patch_size = patch_size;
  grid.channels = img.channels;
  grid.grid_rows = img.height / patch_size;
  grid.grid_cols = img.width / patch_size;
  grid.patches.reserve(static_cast<std::size_t>(grid.m()));
  for (int gr = 0; gr < grid.grid_rows; ++gr) {
    for (int gc = 0; gc < grid.grid_cols; ++gc) {
      std::vector<double> patch;
      patch.reserve(static_cast<std::size_t>(grid.patch_dim()));
      for (int py = 0; py < patch_size; ++py)
        for (int px = 0; px < patch_size; ++px)
          for (int c = 0; c < img.channels; ++c)
            patch.push_back(img.at(gr * patch_size + py, gc * patch_size + px, c));
      grid.patches.push_back(std::move(patch));
    }
  }
  return grid;
}

PixelGrid unpatchify(const PatchGrid& grid) {
  PixelGrid img;
  img.height = grid.grid_rows * grid.patch_size;
  img.width = grid.grid_cols * grid.patch_size;
  img.channels = grid.channels;
  img.pixels.assign(
      static_cast<std::size_t>(img.height) * img.width * img.channels, 0.0);
  const int P = grid.patch_size;
  for (int gr = 0; gr < grid.grid_rows; ++gr) {
    for (int gc = 0; gc < grid.grid_cols; ++gc) {
      const auto& patch = grid.patches[static_cast<std::size_t>(gr * grid.grid_cols + gc)];
      std::size_t k = 0;
      for (int py = 0; py < P; ++py)
        for (int px = 0; px < P; ++px)
          for (int c = 0; c < img.channels; ++c)
            img.at(gr * P + py, gc * P + px, c) = patch[k++];
    }
  }
  return img;
}

namespace {

double bilinear_sample(const PixelGrid& img, double y, double x, int c) {
  const int y0 = std::max(0, std::min(img.height - 1, static_cast<int>(std::floor(y))));
  const int x0 = std::max(0, std::min(img.width - 1, static_cast<int>(std::floor(x))));
  const int y1 = std::min(img.height - 1, y0 + 1);
  const int x1 = std::min(img.width - 1, x0 + 1);
  const double fy = y - y0;
  const double fx = x - x0;
  const double top = img.at(y0, x0, c) * (1.0 - fx) + img.at(y0, x1, c) * fx;
  const double bot = img.at(y1, x0, c) * (1.0 - fx) + img.at(y1, x1, c) * fx;
  return top * (1.0 - fy) + bot * fy;
}

}  // namespace

PixelGrid resize_and_crop(const PixelGrid& img, int patch_size, int short_target,
                          int long_cap) {
  if (img.height <= 0 || img.width <= 0)
    throw validation_error("cannot resize an empty image");
  const int shorter = std::min(img.height, img.width);
  const int longer = std::max(img.height, img.width);
  double scale = static_cast<double>(short_target) / shorter;
  if (longer * scale > long_cap) scale = static_cast<double>(long_cap) / longer;

  const int new_h = std::max(patch_size, static_cast<int>(std::round(img.height * scale)));
  const int new_w = std::max(patch_size, static_cast<int>(std::round(img.width * scale)));

  PixelGrid resized;
  resized.height = new_h;
  resized.width = new_w;
  resized.channels = img.channels;
  resized.pixels.resize(static_cast<std::size_t>(new_h) * new_w * img.channels);
  const double sy = static_cast<double>(img.height) / new_h;
  const double sx = static_cast<double>(img.width) / new_w;
  for (int y = 0; y < new_h; ++y)
    for (int x = 0; x < new_w; ++x)
      for (int c = 0; c < img.channels; ++c)
        resized.at(y, x, c) = quantize_g9(
            bilinear_sample(img, (y + 0.5) * sy - 0.5, (x + 0.5) * sx - 0.5, c));

  const int crop_h = (new_h / patch_size) * patch_size;
  const int crop_w = (new_w / patch_size) * patch_size;
  if (crop_h <= 0 || crop_w <= 0)
    throw validation_error("image too small for patch size after resize");
  const int off_y = (new_h - crop_h) / 2;
  const int off_x = (new_w - crop_w) / 2;

  PixelGrid out;
  out.height = crop_h;
  out.width = crop_w;
  out.channels = img.channels;
  out.pixels.resize(static_cast<std::size_t>(crop_h) * crop_w * img.channels);
  for (int y = 0; y < crop_h; ++y)
    for (int x = 0; x < crop_w; ++x)
      for (int c = 0; c < img.channels; ++c)
        out.at(y, x, c) = resized.at(y + off_y, x + off_x, c);
  return out;
}

namespace {

void skip_ppm_whitespace(std::istream& in) {
  for (;;) {
    const int ch = in.peek();
    if (ch == '#') {
      std::string line;
      std::getline(in, line);
    } else if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
      in.get();
    } else {
      return;
    }
  }
}

}  // namespace

PixelGrid load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open PPM file: " + path);
  std::string magic;
  in >> magic;
  if (magic != "P6") throw validation_error("not a binary PPM (P6) file: " + path);
  skip_ppm_whitespace(in);
  int w = 0, h = 0, maxval = 0;
  in >> w;
  skip_ppm_whitespace(in);
  in >> h;
  skip_ppm_whitespace(in);
  in >> maxval;
  if (!in || w <= 0 || h <= 0) throw validation_error("malformed PPM header: " + path);
  if (maxval != 255) throw validation_error("PPM maxval must be 255: " + path);
  in.get();  // single whitespace after maxval
  PixelGrid img;
  img.height = h;
  img.width = w;
  img.channels = 3;
  const std::size_t count = static_cast<std::size_t>(h) * w * 3;
  std::vector<unsigned char> raw(count);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(in.gcount()) != count)
    throw validation_error("truncated PPM pixel data: " + path);
  img.pixels.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    img.pixels[i] = quantize_g9(raw[i] / 255.0);
  return img;
}

void save_pgm(const std::string& path, int rows, int cols,
              const std::vector<double>& values01) {
  if (static_cast<int>(values01.size()) != rows * cols)
    throw validation_error("PGM value count does not match rows*cols");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw runtime_failure("cannot write PGM file: " + path);
  out << "P5\n" << cols << " " << rows << "\n255\n";
  for (double v : values01) {
    const double clamped = std::max(0.0, std::min(1.0, v));
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * clamped))));
  }
}

namespace {

int label_index_of(const std::vector<std::string>& space, const std::string& name) {
  for (std::size_t i = 0; i < space.size(); ++i)
    if (space[i] == name) return static_cast<int>(i);
  return -1;
}

bool parse_class_nn(const std::string& s, int* out) {
  if (s.rfind("class_", 0) != 0 || s.size() <= 6) return false;
  int value = 0;
  for (std::size_t i = 6; i < s.size(); ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    value = value * 10 + (s[i] - '0');
  }
  *out = value;
  return true;
}

std::string class_nn_name(int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "class_%02d", i);
  return buf;
}

std::vector<std::string> infer_label_space(const std::set<std::string>& seen) {
  const auto& canon = default_label_space();
  bool all_canon = true;
  for (const auto& s : seen)
    if (label_index_of(canon, s) < 0) all_canon = false;
  if (all_canon) return canon;

  bool all_nn = true;
  int max_nn = -1;
  for (const auto& s : seen) {
    int v = 0;
    if (!parse_class_nn(s, &v)) {
      all_nn = false;
      break;
    }
    max_nn = std::max(max_nn, v);
  }
  if (all_nn && max_nn >= 0) {
    std::vector<std::string> space;
    for (int i = 0; i <= max_nn; ++i) space.push_back(class_nn_name(i));
    return space;
  }
  return {seen.begin(), seen.end()};  // std::set iterates sorted
}

const std::set<std::string>& known_instance_fields() {
  static const std::set<std::string> kFields = {"id",        "words", "label",
                                                "rationale", "patches", "mask_mode"};
  return kFields;
}

}  // namespace

Dataset load_jsonl(const std::string& path, const std::vector<std::string>& label_space) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw validation_error("cannot open dataset file: " + path);

  struct Raw {
    Instance inst;
    std::string label_name;
  };
  std::vector<Raw> raws;
  std::set<std::string> seen_labels;
  std::set<std::string> warned_fields;

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw validation_error(path + ": malformed JSON on line " +
                             std::to_string(line_no) + ": " + e.what());
    }
    try {
      Raw raw;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known_instance_fields().count(it.key()) && !warned_fields.count(it.key())) {
          std::cerr << "warning: " << path << ": ignoring unknown field \"" << it.key()
                    << "\" (first seen on line " << line_no << ")\n";
          warned_fields.insert(it.key());
        }
      }
      raw.inst.id = j.at("id").get<std::string>();
      raw.inst.words = j.at("words").get<std::vector<std::string>>();
      raw.label_name = j.at("label").get<std::string>();
      if (j.contains("rationale")) {
        auto r = j.at("rationale").get<std::vector<int>>();
        if (r.size() != raw.inst.words.size())
          throw validation_error("rationale length " + std::to_string(r.size()) +
                                 " != word count " + std::to_string(raw.inst.words.size()));
        for (int v : r)
          if (v != 0 && v != 1) throw validation_error("rationale values must be 0 or 1");
        raw.inst.gold_word_rationales = std::move(r);
      }
      const auto& pj = j.at("patches");
      PatchGrid& g = raw.inst.patch_grid;
      g.grid_rows = pj.at("rows").get<int>();
      g.grid_cols = pj.at("cols").get<int>();
      g.patch_size = pj.at("p").get<int>();
      g.channels = pj.at("c").get<int>();
      if (g.grid_rows <= 0 || g.grid_cols <= 0 || g.patch_size <= 0 ||
          (g.channels != 1 && g.channels != 3))
        throw validation_error("invalid patch geometry");
      const auto data = pj.at("data").get<std::vector<double>>();
      const std::size_t expect =
          static_cast<std::size_t>(g.m()) * static_cast<std::size_t>(g.patch_dim());
      if (data.size() != expect)
        throw validation_error("patch data length " + std::to_string(data.size()) +
                               " != rows*cols*p*p*c = " + std::to_string(expect));
      g.patches.resize(static_cast<std::size_t>(g.m()));
      const std::size_t dim = static_cast<std::size_t>(g.patch_dim());
      for (int k = 0; k < g.m(); ++k)
        g.patches[static_cast<std::size_t>(k)] =
            std::vector<double>(data.begin() + k * dim, data.begin() + (k + 1) * dim);
      seen_labels.insert(raw.label_name);
      raws.push_back(std::move(raw));
    } catch (const json::exception& e) {
      throw validation_error(path + ": bad record on line " + std::to_string(line_no) +
                             ": " + e.what());
    } catch (const validation_error& e) {
      throw validation_error(path + ": bad record on line " + std::to_string(line_no) +
                             ": " + e.what());
    }
  }

  Dataset ds;
  ds.label_space = label_space.empty() ? infer_label_space(seen_labels) : label_space;
  for (auto& raw : raws) {
    const int idx = label_index_of(ds.label_space, raw.label_name);
    if (idx < 0)
      throw validation_error(path + ": unknown class name \"" + raw.label_name + "\"");
    raw.inst.label = idx;
    ds.instances.push_back(std::move(raw.inst));
  }
  ds.rebuild_vocab();
  return ds;
}

std::string instance_to_json_line(const Instance& inst,
                                  const std::vector<std::string>& label_space) {
  if (inst.label < 0 || inst.label >= static_cast<int>(label_space.size()))
    throw validation_error("instance label index out of range");
  std::ostringstream out;
  out << "{\"id\": " << json(inst.id).dump() << ", \"words\": [";
  for (std::size_t i = 0; i < inst.words.size(); ++i) {
    if (i) out << ", ";
    out << json(inst.words[i]).dump();
  }
  out << "], \"label\": " << json(label_space[static_cast<std::size_t>(inst.label)]).dump();
  if (inst.gold_word_rationales) {
    out << ", \"rationale\": [";
    for (std::size_t i = 0; i < inst.gold_word_rationales->size(); ++i) {
      if (i) out << ", ";
      out << (*inst.gold_word_rationales)[i];
    }
    out << "]";
  }
  const PatchGrid& g = inst.patch_grid;
  out << ", \"patches\": {\"rows\": " << g.grid_rows << ", \"cols\": " << g.grid_cols
      << ", \"p\": " << g.patch_size << ", \"c\": " << g.channels << ", \"data\": [";
  bool first = true;
  for (const auto& patch : g.patches) {
    for (double v : patch) {
      if (!first) out << ", ";
      first = false;
      out << format_g9(v);
    }
  }
  out << "]}}";
  return out.str();
}

void save_jsonl(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw runtime_failure("cannot write dataset file: " + path);
  for (const auto& inst : dataset.instances)
    out << instance_to_json_line(inst, dataset.label_space) << "\n";
  if (!out) throw runtime_failure("write failed: " + path);
}

}  // namespace xrat
