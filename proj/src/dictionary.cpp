#include "anchoropt/dictionary.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>

#include "anchoropt/channel.hpp"
#include "anchoropt/error.hpp"
#include "anchoropt/fisher.hpp"

namespace anchoropt {

static_assert(std::endian::native == std::endian::little,
              "dictionary files are written in native little-endian layout");

Dictionary::Dictionary(std::vector<Vec3> candidates, std::vector<Vec3> targets,
                       std::vector<double> lambda, std::vector<double> psi,
                       std::uint64_t scene_hash)
    : candidates_(std::move(candidates)),
      targets_(std::move(targets)),
      lambda_(std::move(lambda)),
      psi_(std::move(psi)),
      scene_hash_(scene_hash) {
  const std::size_t cells = candidates_.size() * targets_.size();
  if (lambda_.size() != cells || psi_.size() != cells) {
    throw DomainError("Dictionary: matrix sizes do not match M x N");
  }
}

Dictionary build_dictionary(const Scene& scene, const std::vector<Vec3>& candidates) {
  if (candidates.empty()) throw DomainError("build_dictionary: no candidate anchors");
  if (scene.targets.empty()) throw DomainError("build_dictionary: no targets");
  const std::size_t M = candidates.size();
  const std::size_t N = scene.targets.size();
  std::vector<double> lambda(M * N);
  std::vector<double> psi(M * N);
  for (std::size_t n = 0; n < N; ++n) {
    for (std::size_t m = 0; m < M; ++m) {
      try {
        const auto lb = channel::snr_db(scene.system, candidates[m], scene.targets[n]);
        lambda[n * M + m] = channel::ranging_weight(lb.snr_linear, scene.system.bandwidth_hz);
        psi[n * M + m] = fisher::info_angle(candidates[m], scene.targets[n]);
      } catch (const Error& e) {
        throw DomainError("build_dictionary: pair (m=" + std::to_string(m) +
                          ", n=" + std::to_string(n) + "): " + e.what());
      }
    }
  }
  return Dictionary(candidates, scene.targets, std::move(lambda), std::move(psi),
                    scene_hash(scene));
}

// ---------------------------------------------------------------------------
// Binary container:
//   magic "ANCHDICT" | u32 version | u64 M | u64 N | u64 scene hash
//   | M x 3 f64 candidates | N x 3 f64 targets | N*M f64 lambda | N*M f64 psi

namespace {

constexpr std::array<char, 8> kMagic = {'A', 'N', 'C', 'H', 'D', 'I', 'C', 'T'};

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_doubles(std::ofstream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

class Input {
 public:
  explicit Input(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw FormatError("dictionary: cannot open " + path);
  }

  template <typename T>
  T get(const char* what) {
    T v;
    read(reinterpret_cast<char*>(&v), sizeof(T), what);
    return v;
  }

  std::vector<double> doubles(std::size_t count, const char* what) {
    std::vector<double> v(count);
    read(reinterpret_cast<char*>(v.data()), count * sizeof(double), what);
    return v;
  }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  void read(char* dst, std::size_t bytes, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(bytes));
    if (static_cast<std::size_t>(in_.gcount()) != bytes) {
      throw FormatError("dictionary: " + path_ + " truncated while reading " + what);
    }
  }

  std::ifstream in_;
  std::string path_;
};

std::vector<double> flatten(const std::vector<Vec3>& pts) {
  std::vector<double> out;
  out.reserve(pts.size() * 3);
  for (const auto& p : pts) {
    out.push_back(p.x);
    out.push_back(p.y);
    out.push_back(p.z);
  }
  return out;
}

std::vector<Vec3> unflatten(const std::vector<double>& v) {
  std::vector<Vec3> out(v.size() / 3);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = {v[3 * i], v[3 * i + 1], v[3 * i + 2]};
  return out;
}

}  // namespace

void export_dictionary(const Dictionary& dict, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("dictionary: cannot write " + path);
  out.write(kMagic.data(), kMagic.size());
  put(out, kDictionaryFormatVersion);
  put(out, static_cast<std::uint64_t>(dict.num_candidates()));
  put(out, static_cast<std::uint64_t>(dict.num_targets()));
  put(out, dict.scene_hash());
  put_doubles(out, flatten(dict.candidates()));
  put_doubles(out, flatten(dict.targets()));
  put_doubles(out, dict.lambda_data());
  put_doubles(out, dict.psi_data());
  if (!out) throw FormatError("dictionary: write failed for " + path);
}

Dictionary import_dictionary(const std::string& path) {
  Input in(path);
  std::array<char, 8> magic{};
  for (char& c : magic) c = in.get<char>("magic");
  if (magic != kMagic) throw FormatError("dictionary: " + path + " is not a dictionary file");
  const auto version = in.get<std::uint32_t>("version");
  if (version != kDictionaryFormatVersion) {
    throw VersionError("dictionary: unsupported format version " + std::to_string(version) +
                       " (expected " + std::to_string(kDictionaryFormatVersion) + ")");
  }
  const auto M = in.get<std::uint64_t>("M");
  const auto N = in.get<std::uint64_t>("N");
  const auto hash = in.get<std::uint64_t>("scene hash");
  if (M == 0 || N == 0 || M > (1ULL << 32) || N > (1ULL << 32)) {
    throw FormatError("dictionary: implausible shape M=" + std::to_string(M) +
                      " N=" + std::to_string(N));
  }
  auto candidates = unflatten(in.doubles(M * 3, "candidates"));
  auto targets = unflatten(in.doubles(N * 3, "targets"));
  auto lambda = in.doubles(M * N, "lambda");
  auto psi = in.doubles(M * N, "psi");
  if (!in.at_end()) throw FormatError("dictionary: trailing bytes in " + path);
  return Dictionary(std::move(candidates), std::move(targets), std::move(lambda), std::move(psi),
                    hash);
}

void export_dictionary_csv(const Dictionary& dict, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("dictionary: cannot write " + path);
  out << "m,n,lambda,psi_rad\n" << std::setprecision(17);
  for (std::size_t n = 0; n < dict.num_targets(); ++n)
    for (std::size_t m = 0; m < dict.num_candidates(); ++m)
      out << m << ',' << n << ',' << dict.lambda(m, n) << ',' << dict.psi(m, n) << '\n';
}

}  // namespace anchoropt
