#include "tnqc/mps/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "tnqc/error.hpp"

namespace tnqc::mps {

namespace {

constexpr char kMagic[8] = {'T', 'N', 'Q', 'C', 'M', 'P', 'S', '1'};

static_assert(std::endian::native == std::endian::little,
              "the MPS container writer assumes a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw IoError("MPS container truncated");
  return value;
}

}  // namespace

void write_binary(std::ostream& out, const Mps& mps) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(mps.num_sites()));
  put<std::uint64_t>(out, mps.chi_max() == linalg::kUnbounded ? 0 : mps.chi_max());
  put<std::int64_t>(out, mps.gauge_center() ? static_cast<std::int64_t>(*mps.gauge_center()) : -1);
  for (const auto& core : mps.cores()) {
    for (std::size_t axis = 0; axis < 3; ++axis) put<std::uint32_t>(out, static_cast<std::uint32_t>(core.dim(axis)));
    for (const cplx& x : core.data()) {
      put<double>(out, x.real());
      put<double>(out, x.imag());
    }
  }
  if (!out) throw IoError("failed writing MPS container");
}

Mps read_binary(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw IoError("not an MPS container (bad magic)");
  const auto n = get<std::uint32_t>(in);
  const auto chi = get<std::uint64_t>(in);
  const auto center = get<std::int64_t>(in);
  if (n == 0) throw IoError("MPS container has zero sites");
  std::vector<DenseTensor> cores;
  for (std::uint32_t i = 0; i < n; ++i) {
    linalg::Shape shape(3);
    for (auto& d : shape) d = get<std::uint32_t>(in);
    std::vector<cplx> data(shape[0] * shape[1] * shape[2]);
    for (auto& x : data) {
      const double re = get<double>(in);
      const double im = get<double>(in);
      x = {re, im};
    }
    cores.emplace_back(std::move(shape), std::move(data));
  }
  std::optional<std::size_t> gauge;
  if (center >= 0) gauge = static_cast<std::size_t>(center);
  return Mps(std::move(cores), gauge, chi == 0 ? linalg::kUnbounded : chi);
}

void save(const std::filesystem::path& path, const Mps& mps) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_binary(out, mps);
}

Mps load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return read_binary(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_text(std::ostream& out, const Mps& mps) {
  out << "mps " << mps.num_sites() << ' '
      << (mps.chi_max() == linalg::kUnbounded ? 0 : mps.chi_max()) << ' '
      << (mps.gauge_center() ? static_cast<long long>(*mps.gauge_center()) : -1LL) << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < mps.num_sites(); ++i) {
    const auto& core = mps.core(i);
    out << "core " << i << ' ' << core.dim(0) << ' ' << core.dim(1) << ' ' << core.dim(2) << '\n';
    for (const cplx& x : core.data()) out << x.real() << ' ' << x.imag() << '\n';
  }
}

Mps read_text(std::istream& in) {
  std::string tag;
  std::size_t n = 0;
  std::size_t chi = 0;
  long long center = -1;
  if (!(in >> tag >> n >> chi >> center) || tag != "mps") throw IoError("bad MPS text header");
  std::vector<DenseTensor> cores;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t index = 0;
    linalg::Shape shape(3);
    if (!(in >> tag >> index >> shape[0] >> shape[1] >> shape[2]) || tag != "core" || index != i) {
      throw IoError("bad MPS text core header");
    }
    std::vector<cplx> data(shape[0] * shape[1] * shape[2]);
    for (auto& x : data) {
      double re = 0;
      double im = 0;
      if (!(in >> re >> im)) throw IoError("MPS text dump truncated");
      x = {re, im};
    }
    cores.emplace_back(std::move(shape), std::move(data));
  }
  std::optional<std::size_t> gauge;
  if (center >= 0) gauge = static_cast<std::size_t>(center);
  return Mps(std::move(cores), gauge, chi == 0 ? linalg::kUnbounded : chi);
}

}  // namespace tnqc::mps
