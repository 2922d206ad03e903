#pragma once

// Drives an external encoder/decoder pair through shell command templates.
// Placeholders: {input} {output} {qp} {width} {height} {frames} {fps}.
// Paths are substituted shell-quoted; numbers verbatim.

#include <fcntl.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "vcmc/codec/common.hpp"
#include "vcmc/dataio/yuv.hpp"
#include "vcmc/error.hpp"
#include "vcmc/imagecore.hpp"

namespace vcmc::codec {

struct ExternalCodecSpec {
  std::string encode_template;
  std::string decode_template;
  double timeout_seconds = 3600.0;

  void Validate() const {
    for (const auto* t : {&encode_template, &decode_template}) {
      const char* which = t == &encode_template ? "encode" : "decode";
      for (const char* ph : {"{input}", "{output}"}) {
        if (t->find(ph) == std::string::npos) {
          throw Error(ErrorCode::kConfig, std::string(which) +
                                              " template lacks " + ph);
        }
      }
    }
    if (!(timeout_seconds > 0.0)) {
      throw Error(ErrorCode::kConfig, "timeout must be > 0");
    }
  }
};

struct ProcessResult {
  int exit_status = 0;
  bool timed_out = false;
  std::string output;  // merged stdout + stderr
};

struct ExternalResult {
  std::filesystem::path coded_path;
  std::vector<uint8_t> coded_bytes;
  VideoSequence decoded;
  CodingStats stats;
};

namespace detail {

inline std::string ShellQuote(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') {
      out += "'\\''";
    } else {
      out += c;
    }
  }
  out += "'";
  return out;
}

inline std::string FormatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

inline std::string Substitute(std::string tmpl,
                              const std::map<std::string, std::string>& vars) {
  for (const auto& [key, value] : vars) {
    const std::string ph = "{" + key + "}";
    size_t pos = 0;
    while ((pos = tmpl.find(ph, pos)) != std::string::npos) {
      tmpl.replace(pos, ph.size(), value);
      pos += value.size();
    }
  }
  return tmpl;
}

inline std::string ReadTextFile(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::string Trimmed(std::string s) {
  constexpr size_t kMax = 2000;
  if (s.size() > kMax) s = "..." + s.substr(s.size() - kMax);
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace detail

// Runs `command` under /bin/sh with stdout and stderr captured to `log_path`.
// The whole process group is killed on timeout.
inline ProcessResult RunShell(const std::string& command, double timeout_seconds,
                              const std::filesystem::path& log_path) {
  std::fflush(nullptr);
  const std::string log_file = log_path.string();
  const pid_t pid = fork();
  if (pid < 0) throw Error(ErrorCode::kProcess, "fork failed");
  if (pid == 0) {
    setpgid(0, 0);
    const int fd = open(log_file.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd >= 0) {
      dup2(fd, STDOUT_FILENO);
      dup2(fd, STDERR_FILENO);
      close(fd);
    }
    execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  setpgid(pid, pid);
  ProcessResult result;
  const auto deadline =
      std::chrono::steady_clock::now() +
      std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(timeout_seconds));
  int status = 0;
  for (;;) {
    const pid_t r = waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0) throw Error(ErrorCode::kProcess, "waitpid failed");
    if (std::chrono::steady_clock::now() >= deadline) {
      kill(-pid, SIGKILL);
      waitpid(pid, &status, 0);
      result.timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  if (!result.timed_out) {
    result.exit_status = WIFEXITED(status) ? WEXITSTATUS(status)
                                           : 128 + WTERMSIG(status);
  }
  result.output = detail::ReadTextFile(log_path);
  return result;
}

namespace detail {

inline void RunStage(const char* stage, const std::string& command,
                     double timeout, const std::filesystem::path& log) {
  const ProcessResult r = RunShell(command, timeout, log);
  if (r.timed_out) {
    throw Error(ErrorCode::kProcess, std::string(stage) + " timed out after " +
                                         FormatNumber(timeout) + " s; output: " +
                                         Trimmed(r.output));
  }
  if (r.exit_status != 0) {
    throw Error(ErrorCode::kProcess,
                std::string(stage) + " exited with status " +
                    std::to_string(r.exit_status) + "; output: " +
                    Trimmed(r.output));
  }
}

}  // namespace detail

// Decodes an externally coded file to a YUV420 sequence of known geometry.
inline VideoSequence decode_external(const std::filesystem::path& coded,
                                     const ExternalCodecSpec& spec, int width,
                                     int height, int frames, double fps,
                                     const std::filesystem::path& workdir) {
  spec.Validate();
  std::filesystem::create_directories(workdir);
  const auto decoded = workdir / "decoded.yuv";
  std::filesystem::remove(decoded);
  const std::map<std::string, std::string> vars = {
      {"input", detail::ShellQuote(coded.string())},
      {"output", detail::ShellQuote(decoded.string())},
      {"width", std::to_string(width)},
      {"height", std::to_string(height)},
      {"frames", std::to_string(frames)},
      {"fps", detail::FormatNumber(fps)}};
  const std::string cmd = detail::Substitute(spec.decode_template, vars);
  detail::RunStage("decoder", cmd, spec.timeout_seconds, workdir / "decode.log");
  if (!std::filesystem::exists(decoded)) {
    throw Error(ErrorCode::kProcess,
                "decoder produced no output file; output: " +
                    detail::Trimmed(detail::ReadTextFile(workdir / "decode.log")));
  }
  const auto size = std::filesystem::file_size(decoded);
  const size_t expected = dataio::Yuv420FrameBytes(width, height) * frames;
  if (size != expected) {
    throw Error(ErrorCode::kProcess,
                "decoded file has " + std::to_string(size) + " bytes, expected " +
                    std::to_string(expected) + "; output: " +
                    detail::Trimmed(detail::ReadTextFile(workdir / "decode.log")));
  }
  return dataio::read_yuv420(decoded, width, height, fps);
}

// Writes the sequence as raw YUV420, runs encoder then decoder, and measures
// the rate from the coded file size. Reference structure and all other
// encoder settings belong to the templates.
inline ExternalResult encode_external(const VideoSequence& seq,
                                      const ExternalCodecSpec& spec, int qp,
                                      const std::filesystem::path& workdir) {
  spec.Validate();
  seq.Validate();
  if (seq.format() != ColorFormat::kYuv420) {
    throw Error(ErrorCode::kFormat, "external codec path takes YUV420 frames");
  }
  std::filesystem::create_directories(workdir);
  const auto input = workdir / "input.yuv";
  const auto coded = workdir / "coded.bin";
  std::filesystem::remove(coded);
  dataio::write_yuv420(seq, input);

  const int frames = static_cast<int>(seq.frames.size());
  const std::map<std::string, std::string> vars = {
      {"input", detail::ShellQuote(input.string())},
      {"output", detail::ShellQuote(coded.string())},
      {"qp", std::to_string(qp)},
      {"width", std::to_string(seq.width())},
      {"height", std::to_string(seq.height())},
      {"frames", std::to_string(frames)},
      {"fps", detail::FormatNumber(seq.fps)}};
  const std::string cmd = detail::Substitute(spec.encode_template, vars);
  detail::RunStage("encoder", cmd, spec.timeout_seconds, workdir / "encode.log");
  if (!std::filesystem::exists(coded)) {
    throw Error(ErrorCode::kProcess,
                "encoder produced no output file; output: " +
                    detail::Trimmed(detail::ReadTextFile(workdir / "encode.log")));
  }

  ExternalResult result;
  result.coded_path = coded;
  {
    std::ifstream in(coded, std::ios::binary);
    result.coded_bytes.assign(std::istreambuf_iterator<char>(in),
                              std::istreambuf_iterator<char>());
  }
  result.decoded = decode_external(coded, spec, seq.width(), seq.height(),
                                   frames, seq.fps, workdir);
  result.stats = MakeStats(result.coded_bytes.size(), frames, seq.fps);
  return result;
}

}  // namespace vcmc::codec
