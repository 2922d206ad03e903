#pragma once

// The two processing flows being compared and the QP sweep around them.
//
//   proposed: contrast reduction -> bicubic down -> codec -> bicubic up
//   anchor:                         bicubic down -> codec -> bicubic up
//
// Both flows work on full-resolution RGB444 frames; the codec sees YUV420.
// Decoded output stays at reduced contrast (only the size is restored).

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "vcmc/codec.hpp"
#include "vcmc/dataio/annotations.hpp"
#include "vcmc/dataio/config.hpp"
#include "vcmc/dataio/image_dir.hpp"
#include "vcmc/dataio/report.hpp"
#include "vcmc/detmetrics.hpp"
#include "vcmc/error.hpp"
#include "vcmc/imagecore.hpp"

namespace vcmc::pipeline {

enum class PipelineKind { kProposed, kAnchor };

inline const char* KindName(PipelineKind k) {
  return k == PipelineKind::kProposed ? "proposed" : "anchor";
}

struct RunRecord {
  PipelineKind kind = PipelineKind::kAnchor;
  int qp = 0;
  double bitrate_kbps = 0.0;
  double psnr_db = 0.0;  // against the unmodified source frames
  codec::CodingStats stats;
  std::vector<uint8_t> coded;
  VideoSequence decoded;  // RGB444 at source dims
  double seconds = 0.0;
};

// Rounds to the nearest even value, never below 2.
inline int EvenDim(double v) {
  const int even = 2 * static_cast<int>(std::lround(v / 2.0));
  return std::max(2, even);
}

// Source frames in the common RGB444 working space.
inline VideoSequence ToWorkingSpace(const VideoSequence& seq) {
  seq.Validate();
  if (seq.width() % 2 != 0 || seq.height() % 2 != 0) {
    throw Error(ErrorCode::kArgument, "pipeline input needs even dims, got " +
                                          std::to_string(seq.width()) + "x" +
                                          std::to_string(seq.height()));
  }
  VideoSequence out;
  out.fps = seq.fps;
  out.frames.reserve(seq.frames.size());
  for (const Frame& f : seq.frames) out.frames.push_back(to_rgb444(f));
  return out;
}

struct RunOptions {
  double alpha = 0.25;
  double scale = 0.5;
  codec::CodecConfig codec;  // qp is overridden per run
  std::filesystem::path workdir = "work";
};

inline RunOptions OptionsFrom(const dataio::ExperimentConfig& cfg) {
  RunOptions o;
  o.alpha = cfg.alpha;
  o.scale = cfg.scale;
  o.codec = cfg.codec;
  o.workdir = cfg.output_dir / "work";
  return o;
}

inline RunRecord run_pipeline(PipelineKind kind, const VideoSequence& source,
                              const RunOptions& opt, int qp) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(opt.scale > 0.0 && opt.scale <= 1.0)) {
    throw Error(ErrorCode::kArgument, "scale must lie in (0,1]");
  }
  const VideoSequence original = ToWorkingSpace(source);
  const int w = original.width(), h = original.height();
  const int dw = EvenDim(w * opt.scale), dh = EvenDim(h * opt.scale);
  const ContrastParams contrast{opt.alpha};
  if (kind == PipelineKind::kProposed) contrast.Validate();

  VideoSequence coded_in;
  coded_in.fps = original.fps;
  coded_in.frames.reserve(original.frames.size());
  for (const Frame& f : original.frames) {
    const Frame reduced =
        kind == PipelineKind::kProposed ? contrast_reduce(f, contrast) : f;
    coded_in.frames.push_back(rgb_to_yuv420(bicubic_resize(reduced, dw, dh)));
  }

  codec::CodecConfig cc = opt.codec;
  cc.qp = qp;
  char sub[16];
  std::snprintf(sub, sizeof(sub), "qp%02d", qp);
  codec::CodedResult coded =
      codec::code_sequence(coded_in, cc, opt.workdir / KindName(kind) / sub);

  RunRecord rec;
  rec.kind = kind;
  rec.qp = qp;
  rec.stats = coded.stats;
  rec.bitrate_kbps = coded.stats.bitrate_kbps;
  rec.coded = std::move(coded.coded);
  rec.decoded.fps = original.fps;
  rec.decoded.frames.reserve(coded.decoded.frames.size());
  for (const Frame& f : coded.decoded.frames) {
    rec.decoded.frames.push_back(bicubic_resize(yuv420_to_rgb(f), w, h));
  }
  rec.psnr_db = psnr(rec.decoded, original);
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

inline RunRecord run_proposed(const VideoSequence& seq, const RunOptions& opt, int qp) {
  return run_pipeline(PipelineKind::kProposed, seq, opt, qp);
}

inline RunRecord run_anchor(const VideoSequence& seq, const RunOptions& opt, int qp) {
  return run_pipeline(PipelineKind::kAnchor, seq, opt, qp);
}

inline RunRecord run_proposed(const VideoSequence& seq,
                              const dataio::ExperimentConfig& cfg, int qp) {
  return run_proposed(seq, OptionsFrom(cfg), qp);
}

inline RunRecord run_anchor(const VideoSequence& seq,
                            const dataio::ExperimentConfig& cfg, int qp) {
  return run_anchor(seq, OptionsFrom(cfg), qp);
}

struct SweepResult {
  det::RDCurve proposed;
  det::RDCurve anchor;
  std::vector<RunRecord> runs;  // proposed QPs in list order, then anchor
};

struct SweepOptions {
  bool keep_decoded = false;  // RunRecord::decoded is dropped otherwise
};

inline std::filesystem::path RunSubdir(PipelineKind kind, int qp) {
  char sub[16];
  std::snprintf(sub, sizeof(sub), "qp%02d", qp);
  return std::filesystem::path(KindName(kind)) / sub;
}

// Runs every (kind, qp) pair, on up to cfg.jobs threads. Results are ordered
// by (kind, position in the QP list) whatever the completion order.
inline SweepResult rd_sweep(const VideoSequence& seq,
                            const dataio::ExperimentConfig& cfg,
                            const SweepOptions& sweep_opt = {}) {
  cfg.Validate();
  const RunOptions opt = OptionsFrom(cfg);

  std::vector<det::GroundTruthBox> gts;
  if (cfg.detections_dir) gts = dataio::load_annotations(cfg.annotations);

  struct Task {
    PipelineKind kind;
    int qp;
  };
  std::vector<Task> tasks;
  for (int qp : cfg.qp_list_proposed) tasks.push_back({PipelineKind::kProposed, qp});
  for (int qp : cfg.qp_list_anchor) tasks.push_back({PipelineKind::kAnchor, qp});

  // Detection files are checked up front so a missing one fails fast.
  std::vector<std::vector<det::Detection>> dets(tasks.size());
  if (cfg.detections_dir) {
    for (size_t i = 0; i < tasks.size(); ++i) {
      auto p = *cfg.detections_dir / RunSubdir(tasks[i].kind, tasks[i].qp);
      p += ".json";
      if (!std::filesystem::exists(p)) {
        throw Error(ErrorCode::kMissingDetections, "no detection file " + p.string());
      }
      dets[i] = dataio::load_detections(p);
    }
  }

  std::vector<std::optional<RunRecord>> results(tasks.size());
  std::vector<det::RDPoint> points(tasks.size());
  std::atomic<size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;

  auto worker = [&] {
    for (;;) {
      const size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        RunRecord rec = run_pipeline(tasks[i].kind, seq, opt, tasks[i].qp);
        if (cfg.write_decoded_frames) {
          dataio::write_image_dir(rec.decoded,
                                  cfg.output_dir / RunSubdir(tasks[i].kind, tasks[i].qp));
        }
        det::RDPoint pt;
        pt.qp = rec.qp;
        pt.bitrate_kbps = rec.bitrate_kbps;
        pt.psnr_db = rec.psnr_db;
        if (cfg.detections_dir) {
          const det::Evaluation ev = det::evaluate(gts, dets[i], cfg.iou_threshold,
                                                   cfg.confidence_threshold);
          pt.map = ev.map;
          pt.per_class_ap = ev.per_class_ap;
        }
        if (!sweep_opt.keep_decoded) rec.decoded = {};
        points[i] = std::move(pt);
        results[i] = std::move(rec);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        next.store(tasks.size());
      }
    }
  };
  const size_t n_threads = std::min<size_t>(static_cast<size_t>(cfg.jobs), tasks.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  SweepResult out;
  out.proposed.label = KindName(PipelineKind::kProposed);
  out.anchor.label = KindName(PipelineKind::kAnchor);
  for (size_t i = 0; i < tasks.size(); ++i) {
    auto& curve = tasks[i].kind == PipelineKind::kProposed ? out.proposed : out.anchor;
    curve.points.push_back(std::move(points[i]));
    out.runs.push_back(std::move(*results[i]));
  }
  out.proposed.SortByBitrate();
  out.anchor.SortByBitrate();
  return out;
}

struct ComparisonReport {
  std::filesystem::path csv_path;
  std::filesystem::path svg_path;
  std::optional<double> bd_rate_percent;  // proposed against anchor, mAP axis
  std::string notice;                     // why BD-rate is absent, if it is
};

// Writes rd.csv and rd.svg into `output_dir` and computes BD-rate when both
// curves carry mAP with at least 4 points.
inline ComparisonReport compare_curves(const det::RDCurve& proposed,
                                       const det::RDCurve& anchor,
                                       const std::filesystem::path& output_dir) {
  if (proposed.points.empty() || anchor.points.empty()) {
    throw Error(ErrorCode::kInsufficientPoints, "cannot compare empty curves");
  }
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + output_dir.string());

  ComparisonReport report;
  report.csv_path = output_dir / "rd.csv";
  report.svg_path = output_dir / "rd.svg";
  const std::vector<det::RDCurve> curves = {proposed, anchor};
  dataio::write_rd_csv(curves, report.csv_path);

  const bool with_map = proposed.has_map() && anchor.has_map();
  if (with_map) {
    dataio::write_svg_plot(curves, report.svg_path, "bitrate [kbps]", "mAP",
                           det::QualityAxis::kMap);
  } else {
    dataio::write_svg_plot(curves, report.svg_path, "bitrate [kbps]", "PSNR [dB]",
                           det::QualityAxis::kPsnr);
  }

  if (!with_map) {
    report.notice = "BD-rate skipped: curves carry no mAP";
  } else if (proposed.points.size() < 4 || anchor.points.size() < 4) {
    report.notice = "BD-rate skipped: insufficient points (need >= 4 per curve)";
  } else {
    try {
      report.bd_rate_percent = det::bd_rate(anchor, proposed, det::QualityAxis::kMap);
    } catch (const Error& e) {
      report.notice = "BD-rate skipped: " + e.message();
    }
  }
  return report;
}

}  // namespace vcmc::pipeline
