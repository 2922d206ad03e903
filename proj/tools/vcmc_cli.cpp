// vcmc: command-line front end for the preprocessing, codec, metric and
// sweep stages.
//
// Exit codes: 0 success, 1 domain error, 2 usage error. Every failure prints
// exactly one line "error: <kind>: <detail>" on stderr.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vcmc/vcmc.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

// Raised for argument combinations CLI11 cannot check on its own.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string OneLine(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

bool IsYuvPath(const fs::path& p) { return p.extension() == ".yuv"; }

struct InputOptions {
  std::string path;
  int width = 0;
  int height = 0;
  double fps = 30.0;
  std::optional<int> frame_limit;
};

void AddInputOptions(CLI::App* cmd, InputOptions& in, const char* flag = "--in") {
  cmd->add_option(flag, in.path, "input: PNG directory or raw .yuv (I420) file")
      ->required();
  cmd->add_option("--width", in.width, "luma width (raw .yuv input)");
  cmd->add_option("--height", in.height, "luma height (raw .yuv input)");
  cmd->add_option("--fps", in.fps, "frame rate used for bitrate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
}

vcmc::VideoSequence LoadInput(const InputOptions& in) {
  const fs::path p(in.path);
  if (fs::is_directory(p)) return vcmc::dataio::read_image_dir(p, in.fps, in.frame_limit);
  if (!fs::exists(p)) throw vcmc::Error(vcmc::ErrorCode::kIo, "no such file " + in.path);
  if (in.width <= 0 || in.height <= 0) {
    throw UsageError("raw input needs --width and --height");
  }
  return vcmc::dataio::read_yuv420(p, in.width, in.height, in.fps, in.frame_limit);
}

vcmc::VideoSequence ToYuv420(const vcmc::VideoSequence& seq) {
  if (seq.format() == vcmc::ColorFormat::kYuv420) return seq;
  vcmc::VideoSequence out;
  out.fps = seq.fps;
  for (const auto& f : seq.frames) {
    out.frames.push_back(vcmc::rgb_to_yuv420(vcmc::to_rgb444(f)));
  }
  return out;
}

void SaveOutput(const vcmc::VideoSequence& seq, const fs::path& out) {
  if (IsYuvPath(out)) {
    vcmc::dataio::write_yuv420(ToYuv420(seq), out);
  } else {
    vcmc::dataio::write_image_dir(seq, out);
  }
}

json StatsJson(const vcmc::codec::CodingStats& s) {
  return {{"total_bits", s.total_bits},
          {"frames", s.frames},
          {"bitrate_kbps", s.bitrate_kbps}};
}

void PrintJson(const json& j) { std::cout << j.dump(2) << "\n"; }

vcmc::codec::ExternalCodecSpec LoadExternalSpec(const std::string& cfg) {
  if (cfg.empty()) throw UsageError("--codec external needs --cfg");
  const vcmc::codec::CodecConfig c =
      vcmc::dataio::parse_codec_config(vcmc::dataio::detail::ParseJsonFile(cfg));
  if (!c.external) throw UsageError("--cfg must describe an external codec");
  return *c.external;
}

vcmc::det::RDCurve PickCurve(const std::vector<vcmc::det::RDCurve>& curves,
                             const std::string& label, const std::string& file) {
  if (label.empty()) {
    if (curves.size() != 1) {
      throw UsageError(file + " holds several curves; pass a label");
    }
    return curves.front();
  }
  for (const auto& c : curves) {
    if (c.label == label) return c;
  }
  throw vcmc::Error(vcmc::ErrorCode::kMissingKey,
                    file + " has no curve labelled " + label);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contrast-reduction coding experiments for machine vision"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "expand help for every subcommand");

  // preprocess
  InputOptions pre_in;
  std::string pre_out;
  double pre_alpha = 0.25;
  double pre_scale = 0.5;
  auto* pre = app.add_subcommand("preprocess", "contrast reduction then bicubic resize");
  AddInputOptions(pre, pre_in);
  pre->add_option("--out", pre_out, "output PNG directory or .yuv file")->required();
  pre->add_option("--alpha", pre_alpha, "share of tonal range pulled to the mean")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  pre->add_option("--scale", pre_scale, "per-axis resize factor, in (0,1]")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));

  // encode
  InputOptions enc_in;
  std::string enc_out, enc_codec = "builtin", enc_cfg, enc_recon, enc_workdir;
  int enc_qp = 32;
  auto* enc = app.add_subcommand("encode", "code a sequence and report its bitrate");
  AddInputOptions(enc, enc_in);
  enc->add_option("--out", enc_out, "coded bitstream path")->required();
  enc->add_option("--codec", enc_codec, "builtin | external")
      ->capture_default_str()
      ->check(CLI::IsMember({"builtin", "external"}));
  enc->add_option("--qp", enc_qp, "quantization parameter")
      ->capture_default_str()
      ->check(CLI::Range(0, 63));
  enc->add_option("--cfg", enc_cfg, "external codec JSON {kind, encode, decode, timeout}");
  enc->add_option("--recon", enc_recon, "also write the decoded sequence here");
  enc->add_option("--workdir", enc_workdir, "scratch dir for the external codec");

  // decode
  std::string dec_in, dec_out, dec_codec = "builtin", dec_cfg, dec_workdir;
  int dec_w = 0, dec_h = 0, dec_frames = 0;
  double dec_fps = 30.0;
  auto* dec = app.add_subcommand("decode", "decode a coded bitstream");
  dec->add_option("--in", dec_in, "coded bitstream")->required();
  dec->add_option("--out", dec_out, "output PNG directory or .yuv file")->required();
  dec->add_option("--codec", dec_codec, "builtin | external")
      ->capture_default_str()
      ->check(CLI::IsMember({"builtin", "external"}));
  dec->add_option("--cfg", dec_cfg, "external codec JSON");
  dec->add_option("--width", dec_w, "luma width (external)");
  dec->add_option("--height", dec_h, "luma height (external)");
  dec->add_option("--frames", dec_frames, "frame count (external)");
  dec->add_option("--fps", dec_fps, "frame rate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  dec->add_option("--workdir", dec_workdir, "scratch dir for the external codec");

  // entropy
  InputOptions ent_in;
  auto* ent = app.add_subcommand("entropy", "per-frame histogram entropy (bits/sample)");
  AddInputOptions(ent, ent_in);

  // eval-ap
  std::string ap_gt, ap_det;
  double ap_iou = 0.5, ap_conf = 0.25;
  auto* evap = app.add_subcommand("eval-ap", "per-class AP and mAP of a detection file");
  evap->add_option("--gt", ap_gt, "ground-truth JSON")->required();
  evap->add_option("--det", ap_det, "detections JSON")->required();
  evap->add_option("--iou", ap_iou, "IoU threshold for a true positive")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  evap->add_option("--conf", ap_conf, "confidence threshold (inclusive)")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));

  // rd-sweep
  std::string sweep_cfg;
  int sweep_jobs = 0;
  auto* sweep = app.add_subcommand(
      "rd-sweep",
      "run both flows over their QP lists (defaults: alpha 0.25, scale 0.5, "
      "proposed QP 32..45, anchor QP 35..47, conf 0.25, IoU 0.5)");
  sweep->add_option("--config", sweep_cfg, "experiment JSON")->required();
  sweep->add_option("--jobs", sweep_jobs, "worker threads (overrides config)")
      ->check(CLI::PositiveNumber);

  // bd-rate
  std::string bd_anchor, bd_test, bd_anchor_label, bd_test_label;
  auto* bd = app.add_subcommand("bd-rate", "Bjontegaard delta-rate on the mAP axis");
  bd->add_option("--anchor-csv", bd_anchor, "anchor curve CSV")->required();
  bd->add_option("--test-csv", bd_test, "test curve CSV")->required();
  bd->add_option("--anchor-label", bd_anchor_label, "curve label when the CSV has several");
  bd->add_option("--test-label", bd_test_label, "curve label when the CSV has several");

  // plot
  std::string plot_csv, plot_svg, plot_ylabel = "mAP";
  auto* plot = app.add_subcommand("plot", "bitrate vs mAP SVG from an RD CSV");
  plot->add_option("--csv", plot_csv, "RD CSV")->required();
  plot->add_option("--svg", plot_svg, "output SVG")->required();
  plot->add_option("--ylabel", plot_ylabel, "y axis label")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << OneLine(e.what()) << "\n";
    return kExitUsage;
  }

  try {
    if (*pre) {
      if (!(pre_scale > 0.0)) throw UsageError("--scale must be > 0");
      const vcmc::VideoSequence src = LoadInput(pre_in);
      const bool to_yuv = IsYuvPath(pre_out);
      const int w = src.width(), h = src.height();
      const int ow = to_yuv ? vcmc::pipeline::EvenDim(w * pre_scale)
                            : std::max(1, static_cast<int>(std::lround(w * pre_scale)));
      const int oh = to_yuv ? vcmc::pipeline::EvenDim(h * pre_scale)
                            : std::max(1, static_cast<int>(std::lround(h * pre_scale)));
      vcmc::VideoSequence out;
      out.fps = src.fps;
      for (const auto& f : src.frames) {
        const bool gray = f.format() == vcmc::ColorFormat::kGray;
        vcmc::Frame reduced =
            vcmc::contrast_reduce(vcmc::to_rgb444(f), vcmc::ContrastParams{pre_alpha});
        if (gray) {
          reduced = vcmc::Frame::FromPlanes(vcmc::ColorFormat::kGray, {reduced.plane(0)});
        }
        out.frames.push_back(vcmc::bicubic_resize(reduced, ow, oh));
      }
      SaveOutput(out, pre_out);
      PrintJson({{"frames", out.frames.size()}, {"width", ow}, {"height", oh},
                 {"alpha", pre_alpha}, {"scale", pre_scale}});
    } else if (*enc) {
      const vcmc::VideoSequence yuv = ToYuv420(LoadInput(enc_in));
      if (enc_codec == "builtin") {
        const vcmc::codec::Bitstream bs = vcmc::codec::encode_builtin(yuv, enc_qp);
        {
          std::ofstream out(enc_out, std::ios::binary | std::ios::trunc);
          out.write(reinterpret_cast<const char*>(bs.bytes.data()),
                    static_cast<std::streamsize>(bs.bytes.size()));
          if (!out) throw vcmc::Error(vcmc::ErrorCode::kIo, "cannot write " + enc_out);
        }
        if (!enc_recon.empty()) SaveOutput(vcmc::codec::decode_builtin(bs, yuv.fps), enc_recon);
        PrintJson(StatsJson(vcmc::codec::MakeStats(
            bs.bytes.size(), static_cast<int64_t>(yuv.frames.size()), yuv.fps)));
      } else {
        const auto spec = LoadExternalSpec(enc_cfg);
        const fs::path workdir =
            enc_workdir.empty() ? fs::path(enc_out + ".work") : fs::path(enc_workdir);
        const auto r = vcmc::codec::encode_external(yuv, spec, enc_qp, workdir);
        fs::copy_file(r.coded_path, enc_out, fs::copy_options::overwrite_existing);
        if (!enc_recon.empty()) SaveOutput(r.decoded, enc_recon);
        PrintJson(StatsJson(r.stats));
      }
    } else if (*dec) {
      vcmc::VideoSequence seq;
      if (dec_codec == "builtin") {
        std::ifstream in(dec_in, std::ios::binary);
        if (!in) throw vcmc::Error(vcmc::ErrorCode::kIo, "cannot open " + dec_in);
        const std::vector<uint8_t> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
        seq = vcmc::codec::decode_builtin(bytes, dec_fps);
      } else {
        if (dec_w <= 0 || dec_h <= 0 || dec_frames <= 0) {
          throw UsageError("external decode needs --width, --height and --frames");
        }
        const auto spec = LoadExternalSpec(dec_cfg);
        const fs::path workdir =
            dec_workdir.empty() ? fs::path(dec_out + ".work") : fs::path(dec_workdir);
        seq = vcmc::codec::decode_external(dec_in, spec, dec_w, dec_h, dec_frames,
                                           dec_fps, workdir);
      }
      SaveOutput(seq, dec_out);
      PrintJson({{"frames", seq.frames.size()},
                 {"width", seq.width()},
                 {"height", seq.height()}});
    } else if (*ent) {
      const vcmc::VideoSequence seq = LoadInput(ent_in);
      json frames = json::array();
      double sum = 0.0;
      for (const auto& f : seq.frames) {
        const double h = vcmc::shannon_entropy(f);
        frames.push_back(h);
        sum += h;
      }
      PrintJson({{"frames", frames},
                 {"mean", sum / static_cast<double>(seq.frames.size())}});
    } else if (*evap) {
      const auto gts = vcmc::dataio::load_annotations(ap_gt);
      const auto dets = vcmc::dataio::load_detections(ap_det);
      const vcmc::det::Evaluation ev = vcmc::det::evaluate(gts, dets, ap_iou, ap_conf);
      json per_class = json::object();
      for (const auto& [cls, ap] : ev.per_class_ap) per_class[std::to_string(cls)] = ap;
      PrintJson({{"per_class_ap", per_class},
                 {"map", ev.map},
                 {"iou_threshold", ap_iou},
                 {"confidence_threshold", ap_conf}});
    } else if (*sweep) {
      vcmc::dataio::ExperimentConfig cfg = vcmc::dataio::load_config(sweep_cfg);
      if (sweep_jobs > 0) cfg.jobs = sweep_jobs;
      const vcmc::VideoSequence seq = vcmc::dataio::load_sequence(cfg.source);
      std::cerr << "rd-sweep: " << seq.frames.size() << " frames " << seq.width() << "x"
                << seq.height() << ", " << cfg.qp_list_proposed.size() << "+"
                << cfg.qp_list_anchor.size() << " runs\n";
      const auto result = vcmc::pipeline::rd_sweep(seq, cfg);
      const auto report =
          vcmc::pipeline::compare_curves(result.proposed, result.anchor, cfg.output_dir);
      json runs = json::array();
      for (const auto& r : result.runs) {
        runs.push_back({{"kind", vcmc::pipeline::KindName(r.kind)},
                        {"qp", r.qp},
                        {"bitrate_kbps", r.bitrate_kbps},
                        {"total_bits", r.stats.total_bits},
                        {"psnr_db", std::isfinite(r.psnr_db) ? json(r.psnr_db) : json(nullptr)}});
      }
      vcmc::dataio::WriteTextFile(runs.dump(2) + "\n", cfg.output_dir / "runs.json");
      json summary = {{"csv", report.csv_path.string()},
                      {"svg", report.svg_path.string()},
                      {"runs", result.runs.size()}};
      if (report.bd_rate_percent) {
        summary["bd_rate_percent"] = *report.bd_rate_percent;
      } else {
        summary["bd_rate_percent"] = nullptr;
        summary["notice"] = report.notice;
      }
      PrintJson(summary);
    } else if (*bd) {
      const auto anchor = PickCurve(vcmc::dataio::read_rd_csv(bd_anchor), bd_anchor_label,
                                    bd_anchor);
      const auto test = PickCurve(vcmc::dataio::read_rd_csv(bd_test), bd_test_label, bd_test);
      const double v = vcmc::det::bd_rate(anchor, test, vcmc::det::QualityAxis::kMap);
      char text[64];
      std::snprintf(text, sizeof(text), "%+.4f%%", v);
      PrintJson({{"bd_rate_percent", v}, {"text", text}});
    } else if (*plot) {
      const auto curves = vcmc::dataio::read_rd_csv(plot_csv);
      vcmc::dataio::write_svg_plot(curves, plot_svg, "bitrate [kbps]", plot_ylabel,
                                   vcmc::det::QualityAxis::kMap);
      PrintJson({{"svg", plot_svg}, {"curves", curves.size()}});
    }
  } catch (const UsageError& e) {
    std::cerr << "error: usage: " << OneLine(e.what()) << "\n";
    return kExitUsage;
  } catch (const vcmc::Error& e) {
    std::cerr << "error: " << OneLine(e.what()) << "\n";
    return e.code() == vcmc::ErrorCode::kConfig ? kExitUsage : kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << OneLine(e.what()) << "\n";
    return kExitDomain;
  }
  return 0;
}
