#include "tstg/tstg.h"

#include <exception>
#include <new>
#include <optional>
#include <string>

#include <omp.h>

#include "tstg/config.hpp"
#include "tstg/error.hpp"
#include "tstg/experiments.hpp"
#include "tstg/frame.hpp"
#include "tstg/gwp.hpp"
#include "tstg/serialize.hpp"

struct tstg_config {
  tstg::RunConfig cfg;
};

struct tstg_packet {
  tstg::GaussianWavePacket packet;
};

struct tstg_frame {
  tstg::FrameSpec spec;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_error_path;
thread_local int g_error_line = 0;
thread_local std::string g_json;

tstg_status fail(tstg_status s, const char *msg) {
  g_error = msg;
  return s;
}

template <class F>
tstg_status guarded(F &&f) {
  g_error.clear();
  g_error_path.clear();
  g_error_line = 0;
  try {
    f();
    return TSTG_OK;
  } catch (const tstg::ConfigError &e) {
    g_error_path = e.path();
    g_error_line = e.line();
    return fail(TSTG_ERROR_CONFIG, e.what());
  } catch (const tstg::ParameterError &e) {
    return fail(TSTG_ERROR_PARAMETER, e.what());
  } catch (const tstg::DegeneracyError &e) {
    return fail(TSTG_ERROR_DEGENERATE, e.what());
  } catch (const tstg::ConsistencyError &e) {
    return fail(TSTG_ERROR_CONSISTENCY, e.what());
  } catch (const tstg::IntegrationError &e) {
    return fail(TSTG_ERROR_INTEGRATION, e.what());
  } catch (const tstg::UnsupportedError &e) {
    return fail(TSTG_ERROR_UNSUPPORTED, e.what());
  } catch (const tstg::AccuracyError &e) {
    return fail(TSTG_ERROR_ACCURACY, e.what());
  } catch (const tstg::IoError &e) {
    return fail(TSTG_ERROR_IO, e.what());
  } catch (const std::bad_alloc &) {
    return fail(TSTG_ERROR_INTERNAL, "out of memory");
  } catch (const std::exception &e) {
    return fail(TSTG_ERROR_INTERNAL, e.what());
  } catch (...) {
    return fail(TSTG_ERROR_INTERNAL, "unknown exception");
  }
}

void require(const void *p, const char *what) {
  if (!p)
    throw tstg::ParameterError(std::string(what) + " must not be NULL");
}

} // namespace

extern "C" {

const char *tstg_version(void) { return "1.0.0"; }

const char *tstg_last_error(void) { return g_error.c_str(); }
const char *tstg_last_error_path(void) { return g_error_path.c_str(); }
int tstg_last_error_line(void) { return g_error_line; }

tstg_status tstg_set_threads(int n) {
  return guarded([&] {
    if (n > 0)
      omp_set_num_threads(n);
  });
}

tstg_status tstg_config_load(const char *path, tstg_config **out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new tstg_config{tstg::load_config_file(path)};
  });
}

tstg_status tstg_config_parse(const char *text, tstg_config **out) {
  return guarded([&] {
    require(text, "text");
    require(out, "out");
    *out = new tstg_config{tstg::load_config_string(text)};
  });
}

void tstg_config_free(tstg_config *cfg) { delete cfg; }

tstg_status tstg_config_set_experiment(tstg_config *cfg, const char *experiment) {
  return guarded([&] {
    require(cfg, "cfg");
    if (!experiment)
      return;
    tstg::RunConfig c = cfg->cfg;
    c.experiment = experiment;
    tstg::validate_config(c);
    cfg->cfg = std::move(c);
  });
}

tstg_status tstg_config_set_seed(tstg_config *cfg, uint64_t seed) {
  return guarded([&] {
    require(cfg, "cfg");
    cfg->cfg.seed = seed;
  });
}

tstg_status tstg_config_effective(const tstg_config *cfg, const char **json) {
  return guarded([&] {
    require(cfg, "cfg");
    require(json, "json");
    g_json = tstg::to_json(cfg->cfg);
    *json = g_json.c_str();
  });
}

tstg_status tstg_run_experiment(const tstg_config *cfg, const char *out_dir) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out_dir, "out_dir");
    tstg::run_experiment(cfg->cfg, out_dir);
  });
}

tstg_status tstg_selfcheck(uint64_t seed, int cases, int *checks, int *failures) {
  return guarded([&] {
    const auto rep = tstg::selfcheck(seed, cases);
    if (checks)
      *checks = rep.checks;
    if (failures)
      *failures = static_cast<int>(rep.failures.size());
    if (!rep.failures.empty())
      g_error = rep.failures.front();
  });
}

tstg_status tstg_packet_create(int d, double epsilon, const double *q, const double *p,
                               const double *width_re, const double *width_im, double action,
                               tstg_packet **out) {
  return guarded([&] {
    require(q, "q");
    require(p, "p");
    require(width_re, "width_re");
    require(width_im, "width_im");
    require(out, "out");
    if (d < 1)
      throw tstg::ParameterError("d must be positive");
    tstg::CMat c(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        c(i, j) = {width_re[i * d + j], width_im[i * d + j]};
    tstg::PhasePoint z{Eigen::Map<const tstg::RVec>(q, d), Eigen::Map<const tstg::RVec>(p, d)};
    *out = new tstg_packet{
        tstg::GaussianWavePacket(epsilon, std::move(z), tstg::SiegelMatrix(c), action)};
  });
}

void tstg_packet_free(tstg_packet *packet) { delete packet; }

tstg_status tstg_packet_inner(const tstg_packet *a, const tstg_packet *b, double *re,
                              double *im) {
  return guarded([&] {
    require(a, "a");
    require(b, "b");
    require(re, "re");
    require(im, "im");
    const auto v = tstg::inner_product(a->packet, b->packet);
    *re = v.real();
    *im = v.imag();
  });
}

tstg_status tstg_packet_evaluate(const tstg_packet *packet, size_t n, const double *x,
                                 double *out) {
  return guarded([&] {
    require(packet, "packet");
    if (n == 0)
      return;
    require(x, "x");
    require(out, "out");
    const auto d = static_cast<std::size_t>(packet->packet.dim());
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = packet->packet(std::span<const double>(x + i * d, d));
      out[2 * i] = v.real();
      out[2 * i + 1] = v.imag();
    }
  });
}

tstg_status tstg_frame_create(int d, double epsilon, double width_re, double width_im,
                              const double *center_q, const double *center_p,
                              const double *half_widths, const int *counts, tstg_frame **out) {
  return guarded([&] {
    require(center_q, "center_q");
    require(center_p, "center_p");
    require(half_widths, "half_widths");
    require(counts, "counts");
    require(out, "out");
    if (d < 1)
      throw tstg::ParameterError("d must be positive");
    tstg::PhasePoint z{Eigen::Map<const tstg::RVec>(center_q, d),
                       Eigen::Map<const tstg::RVec>(center_p, d)};
    *out = new tstg_frame{tstg::FrameSpec(epsilon, tstg::SiegelMatrix::scalar({width_re, width_im}, d),
                                          std::move(z),
                                          std::vector<double>(half_widths, half_widths + 2 * d),
                                          std::vector<int>(counts, counts + 2 * d))};
  });
}

void tstg_frame_free(tstg_frame *frame) { delete frame; }

size_t tstg_frame_size(const tstg_frame *frame) { return frame ? frame->spec.size() : 0; }

tstg_status tstg_frame_analyze(const tstg_frame *frame, const tstg_packet *psi, double *out) {
  return guarded([&] {
    require(frame, "frame");
    require(psi, "psi");
    require(out, "out");
    const auto c = tstg::analyze(frame->spec, psi->packet);
    for (Eigen::Index k = 0; k < c.values.size(); ++k) {
      out[2 * k] = c.values(k).real();
      out[2 * k + 1] = c.values(k).imag();
    }
  });
}

tstg_status tstg_save_coefficients(const tstg_frame *frame, const char *path,
                                   const double *coeffs) {
  return guarded([&] {
    require(frame, "frame");
    require(path, "path");
    require(coeffs, "coeffs");
    const auto n = static_cast<Eigen::Index>(frame->spec.size());
    tstg::CVec v(n);
    for (Eigen::Index k = 0; k < n; ++k)
      v(k) = {coeffs[2 * k], coeffs[2 * k + 1]};
    tstg::save_coefficients(path, tstg::CoefficientTensor(frame->spec, std::move(v)));
  });
}

tstg_status tstg_load_coefficients(const tstg_frame *frame, const char *path, double *coeffs) {
  return guarded([&] {
    require(frame, "frame");
    require(path, "path");
    require(coeffs, "coeffs");
    const auto c = tstg::load_coefficients(path, frame->spec);
    for (Eigen::Index k = 0; k < c.values.size(); ++k) {
      coeffs[2 * k] = c.values(k).real();
      coeffs[2 * k + 1] = c.values(k).imag();
    }
  });
}

} // extern "C"
