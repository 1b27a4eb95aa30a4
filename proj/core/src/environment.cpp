#include "rcmlab/environment.hpp"

#include <cstring>
#include <istream>
#include <limits>
#include <ostream>

#include "rcmlab/rng.hpp"

namespace rcm {

namespace {

constexpr std::uint32_t kMagic = 0x314D4352u;  // "RCM1"
constexpr std::uint32_t kVersion = 1u;

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("environment load: truncated stream");
  return v;
}

}  // namespace

void BoxSpec::validate() const {
  if (d < 2 || d > kMaxDim) throw ConfigError("BoxSpec: d must be in [2, 4]");
  if (n < 1) throw ConfigError("BoxSpec: n must be >= 1");
  if (pad < 0) throw ConfigError("BoxSpec: pad must be >= 0");
}

Environment Environment::sample(const BoxSpec& spec, const ConductanceLaw& law, std::uint64_t seed) {
  spec.validate();
  Environment env;
  env.spec_ = spec;
  env.law_ = law;
  env.seed_ = seed;
  env.edges_ = EdgeIndex(Box(spec.d, spec.radius()));
  const std::int64_t m = env.edges_.edge_count();
  env.weights_.resize(static_cast<std::size_t>(m));
  for (std::int64_t e = 0; e < m; ++e) {
    env.weights_[static_cast<std::size_t>(e)] =
        law.inverse_cdf(uniform01(seed, static_cast<std::uint64_t>(e)));
  }
  return env;
}

double Environment::weight(const Coords& site, int axis) const {
  return weights_[static_cast<std::size_t>(edges_.edge_id(site, axis))];
}

double Environment::weight(std::int64_t site_index, int axis) const {
  return weights_[static_cast<std::size_t>(edges_.edge_id(site_index, axis))];
}

Environment Environment::with_weight(const Coords& site, int axis, double w) const {
  if (!(w > 0.0)) throw DomainError("with_weight: weights must be positive");
  Environment env(*this);
  env.weights_[static_cast<std::size_t>(edges_.edge_id(site, axis))] = w;
  return env;
}

void Environment::save(std::ostream& os) const {
  put(os, kMagic);
  put(os, kVersion);
  put(os, static_cast<std::int32_t>(spec_.d));
  put(os, static_cast<std::int32_t>(spec_.n));
  put(os, static_cast<std::int32_t>(spec_.pad));
  put(os, static_cast<std::uint32_t>(law_.kind()));
  put(os, law_.constant_value());
  put(os, law_.gamma());
  put(os, law_.a_star());
  put(os, static_cast<std::uint64_t>(law_.table().size()));
  for (double q : law_.table()) put(os, q);
  put(os, seed_);
  put(os, static_cast<std::uint64_t>(weights_.size()));
  os.write(reinterpret_cast<const char*>(weights_.data()),
           static_cast<std::streamsize>(weights_.size() * sizeof(double)));
  if (!os) throw IoError("environment save: write failed");
}

Environment Environment::load(std::istream& is) {
  if (get<std::uint32_t>(is) != kMagic) throw IoError("environment load: bad magic");
  if (get<std::uint32_t>(is) != kVersion) throw IoError("environment load: unsupported version");
  BoxSpec spec;
  spec.d = get<std::int32_t>(is);
  spec.n = get<std::int32_t>(is);
  spec.pad = get<std::int32_t>(is);
  const auto kind = static_cast<ConductanceLaw::Kind>(get<std::uint32_t>(is));
  const double c = get<double>(is);
  const double gamma = get<double>(is);
  const double a_star = get<double>(is);
  const auto table_size = get<std::uint64_t>(is);
  std::vector<double> table(table_size);
  for (auto& q : table) q = get<double>(is);
  const std::uint64_t seed = get<std::uint64_t>(is);
  const auto edge_count = get<std::uint64_t>(is);

  ConductanceLaw law = ConductanceLaw::constant(1.0);
  switch (kind) {
    case ConductanceLaw::Kind::Constant:
      law = ConductanceLaw::constant(c);
      break;
    case ConductanceLaw::Kind::Polynomial:
      law = ConductanceLaw::polynomial(gamma);
      break;
    case ConductanceLaw::Kind::Table:
      law = ConductanceLaw::table_raw(std::move(table), a_star);
      break;
    default:
      throw IoError("environment load: bad law kind");
  }

  Environment env;
  env.spec_ = spec;
  env.spec_.validate();
  env.law_ = law;
  env.seed_ = seed;
  env.edges_ = EdgeIndex(Box(spec.d, spec.radius()));
  if (edge_count != static_cast<std::uint64_t>(env.edges_.edge_count()))
    throw IoError("environment load: edge count mismatch");
  env.weights_.resize(edge_count);
  is.read(reinterpret_cast<char*>(env.weights_.data()),
          static_cast<std::streamsize>(edge_count * sizeof(double)));
  if (!is) throw IoError("environment load: truncated weights");
  return env;
}

double SpeedField::at(const Coords& site) const {
  if (!box.contains(site)) throw DomainError("SpeedField: site has unmaterialized incident edges");
  return values[static_cast<std::size_t>(box.index_of(site))];
}

SpeedField pi_field(const Environment& env) {
  const BoxSpec& spec = env.spec();
  const int d = spec.d;
  const int R = spec.radius();
  if (spec.pad < 1) throw DomainError("pi_field: pad >= 1 needed to cover B_n");
  SpeedField field;
  field.box = Box(d, R - 1);
  field.n = spec.n;
  field.values.resize(static_cast<std::size_t>(field.box.site_count()));

  for (std::int64_t i = 0; i < field.box.site_count(); ++i) {
    Coords c = field.box.coords_of(i);
    double sum = 0.0;
    for (int j = 0; j < d; ++j) {
      sum += env.weight(c, j);
      Coords m = c;
      m[j] -= 1;
      sum += env.weight(m, j);
    }
    field.values[static_cast<std::size_t>(i)] = sum;
  }

  // argmin over B_n, lexicographic tie-break by index order
  const Box bn(d, spec.n);
  double best = std::numeric_limits<double>::infinity();
  Coords best_site{};
  for (std::int64_t i = 0; i < bn.site_count(); ++i) {
    const Coords c = bn.coords_of(i);
    const double v = field.values[static_cast<std::size_t>(field.box.index_of(c))];
    if (v < best) {
      best = v;
      best_site = c;
    }
  }
  field.argmin_site = best_site;
  field.min_value = best;
  return field;
}

}  // namespace rcm
