#include "mcartest/mcartest.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "mcartest/error.hpp"
#include "mcartest/harness.hpp"
#include "mcartest/svg_plot.hpp"

struct mcar_dataset {
  mcar::Dataset data;
  mcar::ColumnRoles roles;
};

namespace {

thread_local std::string g_last_error;

mcar_status fail(mcar_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

// Maps the core's exceptions onto status codes.
template <typename F>
mcar_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return MCAR_OK;
  } catch (const mcar::SingularMatrix& e) {
    return fail(MCAR_E_SINGULAR, e.what());
  } catch (const mcar::DataError& e) {
    return fail(MCAR_E_DATA, e.what());
  } catch (const mcar::SpecError& e) {
    return fail(MCAR_E_USAGE, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(MCAR_E_USAGE, std::string("invalid JSON: ") + e.what());
  } catch (const std::ios_base::failure& e) {
    return fail(MCAR_E_IO, e.what());
  } catch (const std::exception& e) {
    return fail(MCAR_E_INTERNAL, e.what());
  } catch (...) {
    return fail(MCAR_E_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

mcar::Method to_core(mcar_method m, const mcar_dataset& ds) {
  switch (m) {
    case MCAR_TEST_AN: return mcar::Method::a_n;
    case MCAR_TEST_DN: return mcar::Method::d_n;
    case MCAR_TEST_D2_UNIVARIATE: return mcar::Method::d2_univariate;
    case MCAR_TEST_D2_GENERAL: return mcar::Method::d2_general;
    case MCAR_TEST_D2_AUTO:
      return ds.roles.q() == 1 ? mcar::Method::d2_univariate : mcar::Method::d2_general;
  }
  throw mcar::SpecError("unknown method code");
}

mcar_method to_c(mcar::Method m) {
  switch (m) {
    case mcar::Method::a_n: return MCAR_TEST_AN;
    case mcar::Method::d_n: return MCAR_TEST_DN;
    case mcar::Method::d2_univariate: return MCAR_TEST_D2_UNIVARIATE;
    case mcar::Method::d2_general: return MCAR_TEST_D2_GENERAL;
  }
  return MCAR_TEST_AN;
}

}  // namespace

extern "C" {

const char* mcar_version(void) { return "1.0.0"; }

const char* mcar_last_error(void) { return g_last_error.c_str(); }

void mcar_string_free(char* s) { delete[] s; }

mcar_status mcar_method_parse(const char* name, mcar_method* out) {
  if (!name || !out) return fail(MCAR_E_USAGE, "null argument");
  const std::string s(name);
  if (s == "d2") {
    *out = MCAR_TEST_D2_AUTO;
    return MCAR_OK;
  }
  return guarded([&] { *out = to_c(mcar::parse_method(s)); });
}

const char* mcar_method_name(mcar_method m) {
  switch (m) {
    case MCAR_TEST_AN: return "A_n";
    case MCAR_TEST_DN: return "D_n";
    case MCAR_TEST_D2_UNIVARIATE: return "d2_univariate";
    case MCAR_TEST_D2_GENERAL: return "d2_general";
    case MCAR_TEST_D2_AUTO: return "d2";
  }
  return "?";
}

mcar_status mcar_dataset_load_csv(const char* path, const char* const* na_tokens, size_t na_count,
                                  const char* roles, mcar_dataset** out) {
  if (!path || !out) return fail(MCAR_E_USAGE, "null argument");
  *out = nullptr;
  return guarded([&] {
    mcar::CsvOptions opts;
    if (na_tokens && na_count > 0) opts.na_tokens.assign(na_tokens, na_tokens + na_count);
    std::optional<std::string> r;
    if (roles && *roles) r = roles;
    auto loaded = mcar::load_csv(path, opts, r);
    *out = new mcar_dataset{std::move(loaded.data), std::move(loaded.roles)};
  });
}

mcar_status mcar_dataset_from_arrays(const double* values, const unsigned char* mask, size_t n,
                                     size_t d, const char* const* names, mcar_dataset** out) {
  if (!values || !mask || !out) return fail(MCAR_E_USAGE, "null argument");
  *out = nullptr;
  return guarded([&] {
    const auto rows = static_cast<Eigen::Index>(n), cols = static_cast<Eigen::Index>(d);
    Eigen::MatrixXd v(rows, cols);
    mcar::MaskMatrix m(rows, cols);
    std::vector<std::string> nm;
    for (size_t j = 0; j < d; ++j) nm.push_back(names ? names[j] : "V" + std::to_string(j + 1));
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < d; ++j) {
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = mask[i * d + j] != 0;
        v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * d + j];
      }
    }
    mcar::Dataset ds(std::move(v), std::move(m), std::move(nm));
    auto roles = mcar::infer_roles(ds);
    *out = new mcar_dataset{std::move(ds), std::move(roles)};
  });
}

mcar_status mcar_dataset_set_roles(mcar_dataset* ds, const char* roles) {
  if (!ds || !roles) return fail(MCAR_E_USAGE, "null argument");
  return guarded([&] { ds->roles = mcar::parse_roles(ds->data, roles); });
}

void mcar_dataset_free(mcar_dataset* ds) { delete ds; }

size_t mcar_dataset_rows(const mcar_dataset* ds) {
  return ds ? static_cast<size_t>(ds->data.rows()) : 0;
}
size_t mcar_dataset_cols(const mcar_dataset* ds) {
  return ds ? static_cast<size_t>(ds->data.cols()) : 0;
}
size_t mcar_dataset_complete_count(const mcar_dataset* ds) {
  return ds ? ds->roles.complete.size() : 0;
}
size_t mcar_dataset_incomplete_count(const mcar_dataset* ds) {
  return ds ? ds->roles.incomplete.size() : 0;
}
size_t mcar_dataset_missing_count(const mcar_dataset* ds, size_t column) {
  if (!ds || column >= static_cast<size_t>(ds->data.cols())) return 0;
  return static_cast<size_t>(ds->data.missing_count(static_cast<Eigen::Index>(column)));
}

mcar_status mcar_dataset_write_csv(const mcar_dataset* ds, const char* path, const char* na_token) {
  if (!ds || !path) return fail(MCAR_E_USAGE, "null argument");
  const mcar_status s = guarded([&] { mcar::write_csv(ds->data, path, na_token ? na_token : "NA"); });
  return s == MCAR_E_DATA ? MCAR_E_IO : s;
}

mcar_status mcar_run_test(const mcar_dataset* ds, mcar_method method, double alpha,
                          mcar_result* out, char** json_out) {
  if (!ds || !out) return fail(MCAR_E_USAGE, "null argument");
  return guarded([&] {
    const auto res = mcar::run_test(to_core(method, *ds), ds->data, ds->roles, alpha);
    *out = mcar_result{to_c(res.method), res.statistic, res.df, res.p_value, res.alpha,
                       res.reject ? 1 : 0};
    if (json_out) *json_out = dup_string(mcar::to_json(res).dump(2));
  });
}

mcar_status mcar_generate(const char* spec_json, mcar_dataset** out, char** resolved_json) {
  if (!spec_json || !out) return fail(MCAR_E_USAGE, "null argument");
  *out = nullptr;
  return guarded([&] {
    const mcar::Scenario s = mcar::scenario_from_json(nlohmann::json::parse(spec_json));
    auto g = mcar::draw_replication(s, 0);
    if (resolved_json) {
      nlohmann::json j = mcar::to_json(s);
      j["replication"] = 0;
      *resolved_json = dup_string(j.dump(2));
    }
    *out = new mcar_dataset{std::move(g.data), std::move(g.roles)};
  });
}

mcar_status mcar_simulate(const char* scenario_json, unsigned workers, const char* results_csv_path,
                          mcar_progress_fn progress, void* user) {
  if (!scenario_json || !results_csv_path) return fail(MCAR_E_USAGE, "null argument");
  return guarded([&] {
    const auto file = mcar::scenario_file_from_json(nlohmann::json::parse(scenario_json));
    mcar::Sweep sweep = file.sweep.value_or(mcar::Sweep{});
    if (!file.sweep) {
      sweep.field = mcar::SweepField::n;
      sweep.values = {static_cast<double>(file.base.n)};
    }
    mcar::Progress cb;
    if (progress) cb = [&](std::size_t d, std::size_t t) { progress(d, t, user); };
    const auto cells = mcar::run_grid(file.base, sweep, workers, cb);
    std::ofstream out(results_csv_path, std::ios::binary);
    if (!out) throw std::ios_base::failure(std::string("cannot write '") + results_csv_path + "'");
    mcar::write_results_csv(cells, out);
    if (!out) throw std::ios_base::failure(std::string("write failed for '") + results_csv_path + "'");
  });
}

mcar_status mcar_plot(const char* results_csv_path, const char* svg_path, const char* x_field,
                      double alpha) {
  if (!results_csv_path || !svg_path) return fail(MCAR_E_USAGE, "null argument");
  return guarded([&] {
    std::ifstream in(results_csv_path, std::ios::binary);
    if (!in) throw std::ios_base::failure(std::string("cannot open '") + results_csv_path + "'");
    mcar::PlotOptions opts;
    opts.x = mcar::parse_plot_axis(x_field ? x_field : "");
    opts.alpha = alpha;
    const std::string svg = mcar::render_svg(mcar::read_results_csv(in), opts);
    std::ofstream out(svg_path, std::ios::binary);
    if (!out) throw std::ios_base::failure(std::string("cannot write '") + svg_path + "'");
    out << svg;
  });
}

}  // extern "C"
