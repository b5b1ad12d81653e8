#pragma once

#include <cmath>
#include <cstdio>
#include <span>
#include <string>

#include "wge/metrics/metrics.hpp"
#include "wge/train/trainer.hpp"

namespace wge {

namespace detail {
inline std::string csv_num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}
}  // namespace detail

inline std::string history_csv(std::span<const HistoryRow> rows) {
  std::string out = "epoch,d_loss_real,d_loss_fake,g_adv,g_l1,heldout_l1,heldout_segsnr\n";
  for (const auto& r : rows) {
    out += std::to_string(r.epoch);
    for (double v : {r.d_loss_real, r.d_loss_fake, r.g_adv, r.g_l1, r.heldout_l1, r.heldout_segsnr})
      out += "," + detail::csv_num(v);
    out += "\n";
  }
  return out;
}

// Failed utterances keep their row with empty metric fields; the mean row comes last.
inline std::string metrics_csv(const MetricReport& rep) {
  std::string out = "utterance_id,segsnr_db,cd_db,llr\n";
  for (const auto& u : rep.utterances) {
    out += u.id;
    if (u.ok) {
      out += "," + detail::csv_num(u.segsnr_db) + "," + detail::csv_num(u.cd_db) + "," + detail::csv_num(u.llr);
    } else {
      out += ",,,";
    }
    out += "\n";
  }
  out += "mean," + detail::csv_num(rep.mean_segsnr_db) + "," + detail::csv_num(rep.mean_cd_db) + "," +
         detail::csv_num(rep.mean_llr) + "\n";
  return out;
}

}  // namespace wge
