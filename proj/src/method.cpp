#include "pvd/integrators.hpp"

namespace pvd {

std::string noise_name(NoiseKind kind) {
  return kind == NoiseKind::MT2 ? "mt2" : "w2ito1";
}

NoiseKind parse_noise(const std::string& name) {
  if (name == "mt2") return NoiseKind::MT2;
  if (name == "w2ito1") return NoiseKind::W2Ito1;
  throw UsageError("unknown noise integrator '" + name + "' (expected mt2 or w2ito1)");
}

NoiseVariant parse_noise_variant(const std::string& name) {
  if (name == "base") return NoiseVariant::Base;
  if (name == "mod1") return NoiseVariant::Mod1;
  if (name == "mod2") return NoiseVariant::Mod2;
  throw UsageError("unknown noise variant '" + name + "' (expected base, mod1 or mod2)");
}

int sigma_evaluations_per_increment(NoiseMethodKind kind) {
  if (kind.kind == NoiseKind::MT2) {
    return 5;
  }
  return kind.variant == NoiseVariant::Mod2 ? 4 : 3;
}

NoiseMethodKind MethodKind::noise_method() const {
  switch (scheme) {
    case Scheme::PVD2Mod1: return {noise, NoiseVariant::Mod1};
    case Scheme::PVD2Mod2: return {noise, NoiseVariant::Mod2};
    default: return {noise, NoiseVariant::Base};
  }
}

bool MethodKind::post_processed() const {
  switch (scheme) {
    case Scheme::PVD2:
    case Scheme::PVD2Markov:
    case Scheme::PVD2Mod1:
    case Scheme::PVD2Mod2:
      return true;
    default:
      return false;
  }
}

bool MethodKind::uses_next_gaussian() const {
  return scheme == Scheme::LMd || scheme == Scheme::LMt;
}

MethodKind parse_method(const std::string& name) {
  if (name == "em") return {Scheme::EM};
  if (name == "lmd") return {Scheme::LMd};
  if (name == "lmt") return {Scheme::LMt};

  const auto split = name.rfind('_');
  if (split == std::string::npos) {
    throw UsageError("unknown method '" + name + "'");
  }
  const std::string head = name.substr(0, split);
  NoiseKind noise;
  try {
    noise = parse_noise(name.substr(split + 1));
  } catch (const UsageError&) {
    throw UsageError("unknown method '" + name + "'");
  }
  if (head == "rk4") return {Scheme::RK4Strang, noise};
  if (head == "pvd2") return {Scheme::PVD2, noise};
  if (head == "pvd2_markov") return {Scheme::PVD2Markov, noise};
  if (head == "pvd2_mod1") return {Scheme::PVD2Mod1, noise};
  if (head == "pvd2_mod2") return {Scheme::PVD2Mod2, noise};
  throw UsageError("unknown method '" + name + "'");
}

std::string method_name(const MethodKind& kind) {
  const std::string suffix = "_" + noise_name(kind.noise);
  switch (kind.scheme) {
    case Scheme::EM: return "em";
    case Scheme::LMd: return "lmd";
    case Scheme::LMt: return "lmt";
    case Scheme::RK4Strang: return "rk4" + suffix;
    case Scheme::PVD2: return "pvd2" + suffix;
    case Scheme::PVD2Markov: return "pvd2_markov" + suffix;
    case Scheme::PVD2Mod1: return "pvd2_mod1" + suffix;
    case Scheme::PVD2Mod2: return "pvd2_mod2" + suffix;
  }
  return "unknown";
}

int force_evaluations_per_step(const MethodKind& kind) {
  switch (kind.scheme) {
    case Scheme::RK4Strang: return 8;
    case Scheme::PVD2Markov: return 2;
    default: return 1;
  }
}

int force_evaluations_at_init(const MethodKind& kind) {
  return kind.post_processed() && kind.scheme != Scheme::PVD2Markov ? 1 : 0;
}

int sigma_evaluations_per_step(const MethodKind& kind) {
  switch (kind.scheme) {
    case Scheme::EM:
    case Scheme::LMd:
    case Scheme::LMt:
      return 1;
    default:
      return sigma_evaluations_per_increment(kind.noise_method());
  }
}

std::optional<std::string> consistency_warning(const MethodKind& kind, int dimension) {
  if (kind.scheme == Scheme::LMd && dimension > 1) {
    return std::string(
        "warning: lmd (a = 1/4) is not consistent for general diffusion tensors in d > 1; "
        "its error is expected to plateau");
  }
  return std::nullopt;
}

}  // namespace pvd
