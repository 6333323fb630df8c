#include "vtd/ingest.hpp"

#include <cctype>
#include <cmath>
#include <optional>
#include <string>

#include "vtd/error.hpp"
#include "vtd/text.hpp"

namespace vtd::ingest {
namespace {

// Leading decimal number of a field such as "250/1000(0)" or "200(24)/mV".
std::string_view leading_number(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
  while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.' ||
                          s[i] == 'e' || s[i] == 'E' ||
                          ((s[i] == '-' || s[i] == '+') && i > 0 &&
                           (s[i - 1] == 'e' || s[i - 1] == 'E')))) {
    ++i;
  }
  return s.substr(0, i);
}

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedHeader, what);
}

struct FormatField {
  int code = 0;
  std::size_t byte_offset = 0;
};

FormatField parse_format_field(std::string_view field) {
  std::size_t i = 0;
  while (i < field.size() && std::isdigit(static_cast<unsigned char>(field[i]))) ++i;
  const auto code = text::parse_int(field.substr(0, i));
  if (!code) malformed("bad format field '" + std::string(field) + "'");
  FormatField out;
  out.code = static_cast<int>(*code);
  if (const std::size_t plus = field.find('+'); plus != std::string_view::npos) {
    const auto off = text::parse_int(field.substr(plus + 1));
    if (!off || *off < 0) malformed("bad byte offset in '" + std::string(field) + "'");
    out.byte_offset = static_cast<std::size_t>(*off);
  }
  return out;
}

struct ParsedSignal {
  WfdbSignal signal;
  std::size_t byte_offset = 0;
};

ParsedSignal parse_signal_line(std::string_view line) {
  const auto f = text::split_ws(line);
  if (f.size() < 2) malformed("signal line needs a file name and a format: '" + std::string(line) + "'");
  ParsedSignal out;
  out.signal.file_name = std::string(f[0]);
  const FormatField fmt = parse_format_field(f[1]);
  if (fmt.code != 212 && fmt.code != 16) {
    throw Error(ErrorCode::UnsupportedFormat,
                "WFDB format " + std::to_string(fmt.code) + " is not supported (212 or 16)");
  }
  out.signal.format_code = fmt.code;
  out.byte_offset = fmt.byte_offset;

  bool have_baseline = false;
  if (f.size() > 2) {
    const std::string_view gain_field = f[2];
    const auto gain = text::parse_double(leading_number(gain_field));
    if (!gain || *gain < 0.0) malformed("bad gain field '" + std::string(gain_field) + "'");
    out.signal.gain = *gain == 0.0 ? kDefaultGain : *gain;
    if (const std::size_t open = gain_field.find('('); open != std::string_view::npos) {
      const std::size_t close = gain_field.find(')', open);
      if (close == std::string_view::npos) malformed("unterminated baseline in '" + std::string(gain_field) + "'");
      const auto base = text::parse_int(gain_field.substr(open + 1, close - open - 1));
      if (!base) malformed("bad baseline in '" + std::string(gain_field) + "'");
      out.signal.baseline = static_cast<int>(*base);
      have_baseline = true;
    }
  }
  if (!have_baseline && f.size() > 4) {
    const auto zero = text::parse_int(f[4]);
    if (!zero) malformed("bad ADC zero field '" + std::string(f[4]) + "'");
    out.signal.baseline = static_cast<int>(*zero);
  }
  if (f.size() > 8) {
    std::string desc;
    for (std::size_t i = 8; i < f.size(); ++i) {
      if (!desc.empty()) desc += ' ';
      desc += f[i];
    }
    out.signal.description = std::move(desc);
  }
  return out;
}

std::vector<ParsedSignal> parse_header_full(std::string_view text, WfdbHeader& header) {
  if (text::trim(text).empty()) malformed("empty header");
  std::vector<std::string_view> content;
  for (std::string_view line : text::split_lines(text)) {
    const std::string_view t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    content.push_back(t);
  }
  if (content.empty()) malformed("header has no record line");

  const auto rec = text::split_ws(content[0]);
  if (rec.size() < 3) malformed("record line needs name, signal count and sampling rate");
  if (rec[0].find('/') != std::string_view::npos) malformed("multi-segment records are not supported");
  header.record_name = std::string(rec[0]);

  const auto nsig = text::parse_int(rec[1]);
  if (!nsig || *nsig < 1) malformed("signal count must be a positive integer, got '" + std::string(rec[1]) + "'");
  header.n_signals = static_cast<std::size_t>(*nsig);

  const auto fs = text::parse_double(leading_number(rec[2]));
  if (!fs) malformed("sampling rate is not numeric: '" + std::string(rec[2]) + "'");
  if (!(*fs > 0.0) || *fs > kMaxSamplingRateHz) malformed("sampling rate must be in (0, 10000] Hz");
  header.fs = *fs;

  if (rec.size() > 3) {
    const auto n = text::parse_int(rec[3]);
    if (!n || *n < 0) malformed("sample count is not a non-negative integer: '" + std::string(rec[3]) + "'");
    header.n_samples = static_cast<std::size_t>(*n);
  }

  if (content.size() - 1 < header.n_signals) {
    malformed("header declares " + std::to_string(header.n_signals) + " signals but lists " +
              std::to_string(content.size() - 1));
  }
  std::vector<ParsedSignal> parsed;
  for (std::size_t i = 0; i < header.n_signals; ++i) {
    parsed.push_back(parse_signal_line(content[i + 1]));
    header.signals.push_back(parsed.back().signal);
  }
  return parsed;
}

}  // namespace

WfdbHeader parse_wfdb_header(std::string_view text) {
  WfdbHeader header;
  parse_header_full(text, header);
  return header;
}

std::vector<int> decode_format_212(std::span<const std::uint8_t> bytes, std::size_t n_samples) {
  const std::size_t needed = (n_samples * 3 + 1) / 2;
  if (bytes.size() < needed) {
    throw Error(ErrorCode::TruncatedData, "format 212 needs " + std::to_string(needed) +
                                              " bytes for " + std::to_string(n_samples) +
                                              " samples, got " + std::to_string(bytes.size()));
  }
  auto sign12 = [](int v) { return v >= 2048 ? v - 4096 : v; };
  std::vector<int> out(n_samples);
  for (std::size_t i = 0, byte = 0; i < n_samples; i += 2, byte += 3) {
    const int b0 = bytes[byte];
    const int b1 = bytes[byte + 1];
    out[i] = sign12(((b1 & 0x0F) << 8) | b0);
    if (i + 1 < n_samples) {
      const int b2 = bytes[byte + 2];
      out[i + 1] = sign12(((b1 & 0xF0) << 4) | b2);
    }
  }
  return out;
}

std::vector<int> decode_format_16(std::span<const std::uint8_t> bytes, std::size_t n_samples) {
  if (bytes.size() < 2 * n_samples) {
    throw Error(ErrorCode::TruncatedData, "format 16 needs " + std::to_string(2 * n_samples) +
                                              " bytes, got " + std::to_string(bytes.size()));
  }
  std::vector<int> out(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const auto raw = static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
    out[i] = static_cast<std::int16_t>(raw);
  }
  return out;
}

std::vector<double> to_millivolts(std::span<const int> adc, double gain, int baseline) {
  if (!(gain > 0.0) || !std::isfinite(gain)) {
    throw Error(ErrorCode::InvalidGain, "gain must be positive");
  }
  std::vector<double> out(adc.size());
  for (std::size_t i = 0; i < adc.size(); ++i) {
    out[i] = static_cast<double>(adc[i] - baseline) / gain;
  }
  return out;
}

EcgRecord read_wfdb_record(const std::filesystem::path& header_path) {
  WfdbHeader header;
  const auto parsed = parse_header_full(text::read_file(header_path), header);
  const WfdbSignal& sig0 = header.signals.front();

  std::size_t frame = 0;
  for (const auto& s : header.signals) {
    if (s.file_name == sig0.file_name) {
      if (s.format_code != sig0.format_code) {
        throw Error(ErrorCode::UnsupportedFormat, "mixed formats within '" + sig0.file_name + "'");
      }
      ++frame;
    }
  }

  const auto raw = text::read_binary(header_path.parent_path() / sig0.file_name);
  const std::size_t offset = parsed.front().byte_offset;
  if (offset > raw.size()) throw Error(ErrorCode::TruncatedData, "byte offset beyond end of signal file");
  const std::span<const std::uint8_t> bytes(raw.data() + offset, raw.size() - offset);

  std::size_t per_signal = header.n_samples;
  if (per_signal == 0) {
    const std::size_t total = sig0.format_code == 212 ? bytes.size() * 2 / 3 : bytes.size() / 2;
    per_signal = total / frame;
  }
  const std::size_t total = per_signal * frame;
  const std::vector<int> interleaved = sig0.format_code == 212 ? decode_format_212(bytes, total)
                                                               : decode_format_16(bytes, total);
  std::vector<int> first(per_signal);
  for (std::size_t i = 0; i < per_signal; ++i) first[i] = interleaved[i * frame];
  return EcgRecord(to_millivolts(first, sig0.gain, sig0.baseline), header.fs, header.record_name);
}

EcgRecord read_csv_record(std::string_view text) {
  const auto lines = text::split_lines(text);
  if (lines.empty()) throw Error(ErrorCode::MissingDirective, "empty record file");
  const std::string_view directive = text::trim(lines[0]);
  if (directive.empty() || directive.front() != '#') {
    throw Error(ErrorCode::MissingDirective, "line 1 must be '# fs=<Hz> id=<name>'");
  }
  std::optional<double> fs;
  std::string id;
  for (std::string_view tok : text::split_ws(directive.substr(1))) {
    if (tok.starts_with("fs=")) {
      fs = text::parse_double(tok.substr(3));
      if (!fs) throw Error(ErrorCode::MissingDirective, "fs value is not numeric: '" + std::string(tok) + "'");
    } else if (tok.starts_with("id=")) {
      id = std::string(tok.substr(3));
    }
  }
  if (!fs) throw Error(ErrorCode::MissingDirective, "directive line has no fs=<Hz>");
  if (id.empty()) throw Error(ErrorCode::MissingDirective, "directive line has no id=<name>");

  std::vector<double> samples;
  samples.reserve(lines.size());
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::string_view t = text::trim(lines[i]);
    if (t.empty()) continue;
    const auto v = text::parse_double(t);
    if (!v) {
      throw Error(ErrorCode::NonNumericSample,
                  "line " + std::to_string(i + 1) + ": '" + std::string(t) + "' is not a number");
    }
    samples.push_back(*v);
  }
  return EcgRecord(std::move(samples), *fs, std::move(id));
}

std::string write_csv_record(const EcgRecord& record) {
  if (record.id().empty() || record.id().find_first_of(" \t\r\n") != std::string::npos) {
    throw Error(ErrorCode::InvalidRecord, "record id must be a non-empty token");
  }
  std::string out = "# fs=" + text::format_double(record.fs()) + " id=" + record.id() + "\n";
  out.reserve(out.size() + record.n_samples() * 12);
  for (double v : record.samples()) {
    out += text::format_double(v);
    out += '\n';
  }
  return out;
}

}  // namespace vtd::ingest
