#include "inslab/dgp_sim/dataset_io.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unordered_map>

#include "inslab/common/error.hpp"
#include "inslab/common/format.hpp"

namespace inslab {
namespace fs = std::filesystem;

namespace {

class CsvReader {
 public:
  CsvReader(const std::string& path, const std::string& header) : path_(path), in_(path) {
    if (!in_) throw ParseError(path, 0, "cannot open file");
    std::string line;
    if (!std::getline(in_, line)) {
      empty_ = true;
      return;
    }
    ++line_no_;
    strip_cr(line);
    if (line != header) throw ParseError(path_, line_no_, "expected header '" + header + "'");
  }

  bool empty() const { return empty_; }

  bool next(std::vector<std::string_view>& fields) {
    while (std::getline(in_, line_)) {
      ++line_no_;
      strip_cr(line_);
      if (line_.empty()) continue;
      fields.clear();
      std::size_t pos = 0;
      while (true) {
        const auto comma = line_.find(',', pos);
        fields.emplace_back(std::string_view(line_).substr(
            pos, comma == std::string::npos ? std::string::npos : comma - pos));
        if (comma == std::string::npos) break;
        pos = comma + 1;
      }
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(path_, line_no_, msg); }

  double number(std::string_view f) const {
    double v = 0.0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
      fail("bad number '" + std::string(f) + "'");
    }
    return v;
  }

  long integer(std::string_view f) const {
    long v = 0;
    const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
    if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
      fail("bad integer '" + std::string(f) + "'");
    }
    return v;
  }

 private:
  static void strip_cr(std::string& s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
  }

  std::string path_;
  std::ifstream in_;
  std::string line_;
  std::size_t line_no_ = 0;
  bool empty_ = false;
};

std::FILE* open_out(const fs::path& p) {
  std::FILE* f = std::fopen(p.string().c_str(), "w");
  if (!f) throw InvalidArgument("cannot write '" + p.string() + "'");
  return f;
}

}  // namespace

void write_dataset(const std::vector<InsureeRecord>& records, const std::string& dir) {
  fs::create_directories(dir);
  std::FILE* ins = open_out(fs::path(dir) / "insurees.csv");
  std::FILE* cl = open_out(fs::path(dir) / "claims.csv");
  std::fputs("id,z,chi,j\n", ins);
  std::fputs("id,claim_idx,damage\n", cl);
  bool all_truth = !records.empty();
  for (const auto& r : records) {
    std::fprintf(ins, "%ld,%s,%d,%zu\n", r.id, format_exact(r.z).c_str(), r.chi,
                 r.damages.size());
    for (std::size_t k = 0; k < r.damages.size(); ++k) {
      std::fprintf(cl, "%ld,%zu,%.6f\n", r.id, k + 1, r.damages[k]);
    }
    all_truth = all_truth && r.truth.has_value();
  }
  std::fclose(ins);
  std::fclose(cl);
  if (all_truth) {
    std::FILE* tr = open_out(fs::path(dir) / "truth.csv");
    std::fputs("id,theta,a\n", tr);
    for (const auto& r : records) {
      std::fprintf(tr, "%ld,%s,%s\n", r.id, format_exact(r.truth->theta).c_str(),
                   format_exact(r.truth->a).c_str());
    }
    std::fclose(tr);
  }
}

std::vector<InsureeRecord> read_dataset(const std::string& dir) {
  std::vector<InsureeRecord> records;
  std::unordered_map<long, std::size_t> index;
  std::vector<std::string_view> f;
  {
    CsvReader in((fs::path(dir) / "insurees.csv").string(), "id,z,chi,j");
    while (!in.empty() && in.next(f)) {
      if (f.size() != 4) in.fail("expected 4 fields");
      InsureeRecord r;
      r.id = in.integer(f[0]);
      r.z = in.number(f[1]);
      r.chi = static_cast<int>(in.integer(f[2]));
      r.j = in.integer(f[3]);
      if (r.chi != 1 && r.chi != 2) in.fail("chi must be 1 or 2");
      if (r.j < 0) in.fail("negative accident count");
      if (!index.emplace(r.id, records.size()).second) in.fail("duplicate id");
      records.push_back(std::move(r));
    }
  }
  {
    CsvReader in((fs::path(dir) / "claims.csv").string(), "id,claim_idx,damage");
    while (!in.empty() && in.next(f)) {
      if (f.size() != 3) in.fail("expected 3 fields");
      const long id = in.integer(f[0]);
      const long k = in.integer(f[1]);
      const double d = in.number(f[2]);
      if (!(d >= 0.0)) in.fail("negative damage");
      const auto it = index.find(id);
      if (it == index.end()) in.fail("claim for unknown id " + std::to_string(id));
      auto& r = records[it->second];
      if (k != static_cast<long>(r.damages.size()) + 1) in.fail("claim_idx out of sequence");
      if (k > r.j) in.fail("more claims than j for id " + std::to_string(id));
      r.damages.push_back(d);
    }
  }
  for (const auto& r : records) {
    if (static_cast<long>(r.damages.size()) != r.j) {
      throw ParseError((fs::path(dir) / "claims.csv").string(), 0,
                       "id " + std::to_string(r.id) + " has " +
                           std::to_string(r.damages.size()) + " claims but j=" +
                           std::to_string(r.j));
    }
  }
  const fs::path truth = fs::path(dir) / "truth.csv";
  if (fs::exists(truth)) {
    CsvReader in(truth.string(), "id,theta,a");
    while (!in.empty() && in.next(f)) {
      if (f.size() != 3) in.fail("expected 3 fields");
      const auto it = index.find(in.integer(f[0]));
      if (it == index.end()) in.fail("truth for unknown id");
      records[it->second].truth = TypePair{in.number(f[1]), in.number(f[2])};
    }
  }
  return records;
}

}  // namespace inslab
