#include "rdgauge/y4m.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "rdgauge/error.hpp"

namespace rdgauge {
namespace {

constexpr std::string_view kSignature = "YUV4MPEG2";
constexpr std::string_view kFrameMarker = "FRAME";
constexpr std::size_t kMaxLine = 4096;

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw FormatError(fmt::format("y4m: bad {} value '{}'", what, text));
  return value;
}

Rational parse_ratio(std::string_view text, std::string_view what) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw FormatError(fmt::format("y4m: {} must be N:D, got '{}'", what, text));
  return {parse_int(text.substr(0, colon), what), parse_int(text.substr(colon + 1), what)};
}

// Reads up to and including '\n'. Returns false if the stream ended first.
bool read_line(std::istream& in, std::string& line) {
  line.clear();
  char c = 0;
  while (in.get(c)) {
    if (c == '\n') return true;
    if (line.size() >= kMaxLine) throw FormatError("y4m: header line too long");
    line.push_back(c);
  }
  return false;
}

void read_plane(std::istream& in, const VideoHeader& header, Plane& plane,
                std::vector<unsigned char>& scratch) {
  const std::size_t count = plane.samples.size();
  const std::size_t bytes = count * header.bytes_per_sample();
  scratch.resize(bytes);
  in.read(reinterpret_cast<char*>(scratch.data()), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes)
    throw IncompleteFrameError(fmt::format("y4m: frame payload truncated ({} of {} plane bytes)",
                                           in.gcount(), bytes));
  if (header.bytes_per_sample() == 1) {
    for (std::size_t i = 0; i < count; ++i) plane.samples[i] = scratch[i];
  } else {
    for (std::size_t i = 0; i < count; ++i)
      plane.samples[i] = static_cast<std::uint16_t>(scratch[2 * i] | (scratch[2 * i + 1] << 8));
  }
}

Frame read_payload(std::istream& in, const VideoHeader& header) {
  Frame frame{Plane(header.width, header.height), Plane(header.chroma_width(), header.chroma_height()),
              Plane(header.chroma_width(), header.chroma_height())};
  std::vector<unsigned char> scratch;
  read_plane(in, header, frame.y, scratch);
  read_plane(in, header, frame.u, scratch);
  read_plane(in, header, frame.v, scratch);
  return frame;
}

// Consumes a FRAME marker line. Returns the marker length (with newline), or 0
// at a clean end of stream.
std::size_t consume_marker(std::istream& in) {
  if (in.peek() == std::char_traits<char>::eof()) return 0;
  std::string line;
  if (!read_line(in, line)) {
    if (line.rfind(kFrameMarker, 0) == 0)
      throw IncompleteFrameError("y4m: stream ends inside a FRAME marker");
    throw FormatError("y4m: expected FRAME marker");
  }
  if (line.rfind(kFrameMarker, 0) != 0 ||
      (line.size() > kFrameMarker.size() && line[kFrameMarker.size()] != ' '))
    throw FormatError("y4m: expected FRAME marker");
  return line.size() + 1;
}

void write_plane(const VideoHeader& header, const Plane& plane, std::vector<unsigned char>& scratch,
                 std::ostream& out) {
  if (header.bytes_per_sample() == 1) {
    scratch.resize(plane.samples.size());
    for (std::size_t i = 0; i < plane.samples.size(); ++i)
      scratch[i] = static_cast<unsigned char>(plane.samples[i]);
  } else {
    scratch.resize(plane.samples.size() * 2);
    for (std::size_t i = 0; i < plane.samples.size(); ++i) {
      scratch[2 * i] = static_cast<unsigned char>(plane.samples[i] & 0xff);
      scratch[2 * i + 1] = static_cast<unsigned char>(plane.samples[i] >> 8);
    }
  }
  out.write(reinterpret_cast<const char*>(scratch.data()), static_cast<std::streamsize>(scratch.size()));
}

}  // namespace

std::size_t VideoHeader::sample_count() const {
  return static_cast<std::size_t>(width) * height +
         2 * static_cast<std::size_t>(chroma_width()) * chroma_height();
}

bool VideoHeader::same_format(const VideoHeader& o) const {
  return width == o.width && height == o.height && fps == o.fps && chroma == o.chroma &&
         bit_depth == o.bit_depth && interlacing == o.interlacing && pixel_aspect == o.pixel_aspect;
}

Frame Frame::filled(const VideoHeader& header, std::uint16_t luma, std::uint16_t chroma) {
  return Frame{Plane(header.width, header.height, luma),
               Plane(header.chroma_width(), header.chroma_height(), chroma),
               Plane(header.chroma_width(), header.chroma_height(), chroma)};
}

void validate(const VideoHeader& h) {
  if (h.width < 1 || h.height < 1)
    throw ValidationError(fmt::format("y4m: invalid dimensions {}x{}", h.width, h.height));
  if (h.fps.num < 1 || h.fps.den < 1)
    throw ValidationError(fmt::format("y4m: invalid frame rate {}:{}", h.fps.num, h.fps.den));
  const int implied_depth = h.chroma == Chroma::C420p10 ? 10 : 8;
  if (h.bit_depth != implied_depth)
    throw ValidationError(fmt::format("y4m: bit depth {} contradicts chroma tag", h.bit_depth));
  if (h.width % 2 != 0 || h.height % 2 != 0)
    throw ValidationError(
        fmt::format("y4m: 4:2:0 needs even dimensions, got {}x{}", h.width, h.height));
  if (h.interlacing != 'p')
    throw UnsupportedFormatError(fmt::format("y4m: interlacing '{}' unsupported", h.interlacing));
}

void validate(const VideoHeader& header, const Frame& frame) {
  auto check = [&](const Plane& p, int w, int h, const char* name) {
    if (p.width != w || p.height != h || p.samples.size() != static_cast<std::size_t>(w) * h)
      throw ValidationError(fmt::format("y4m: {} plane is {}x{}, header wants {}x{}", name, p.width,
                                        p.height, w, h));
    for (auto s : p.samples)
      if (s > header.max_sample())
        throw ValidationError(
            fmt::format("y4m: {} sample {} exceeds {}-bit range", name, s, header.bit_depth));
  };
  check(frame.y, header.width, header.height, "Y");
  check(frame.u, header.chroma_width(), header.chroma_height(), "U");
  check(frame.v, header.chroma_width(), header.chroma_height(), "V");
}

VideoHeader parse_header_line(std::string_view line) {
  if (line.substr(0, kSignature.size()) != kSignature ||
      (line.size() > kSignature.size() && line[kSignature.size()] != ' '))
    throw FormatError("y4m: missing YUV4MPEG2 signature");

  VideoHeader h;
  bool have_w = false, have_h = false, have_f = false;
  std::string_view rest = line.substr(kSignature.size());
  while (!rest.empty()) {
    auto start = rest.find_first_not_of(' ');
    if (start == std::string_view::npos) break;
    rest.remove_prefix(start);
    auto end = rest.find(' ');
    std::string_view tag = rest.substr(0, end);
    rest = end == std::string_view::npos ? std::string_view{} : rest.substr(end);

    const char key = tag.front();
    std::string_view value = tag.substr(1);
    switch (key) {
      case 'W': h.width = parse_int(value, "width"); have_w = true; break;
      case 'H': h.height = parse_int(value, "height"); have_h = true; break;
      case 'F': h.fps = parse_ratio(value, "frame rate"); have_f = true; break;
      case 'A': h.pixel_aspect = parse_ratio(value, "pixel aspect"); break;
      case 'I':
        if (value.size() != 1) throw FormatError(fmt::format("y4m: bad interlace tag '{}'", tag));
        // '?' (unknown) is treated as progressive.
        h.interlacing = value[0] == '?' ? 'p' : value[0];
        break;
      case 'C':
        if (value == "420" || value == "420jpeg" || value == "420paldv" || value == "420mpeg2") {
          h.chroma = Chroma::C420;
          h.bit_depth = 8;
        } else if (value == "420p10") {
          h.chroma = Chroma::C420p10;
          h.bit_depth = 10;
        } else {
          throw UnsupportedFormatError(fmt::format("y4m: chroma '{}' unsupported", value));
        }
        break;
      default:
        h.ignored_tags.emplace_back(tag);
        break;
    }
  }
  if (!have_w || !have_h || !have_f) throw FormatError("y4m: header lacks W, H or F tag");
  validate(h);
  return h;
}

VideoHeader parse_header(std::istream& in) {
  std::string line;
  if (!read_line(in, line)) {
    if (line.rfind(kSignature, 0) != 0) throw FormatError("y4m: missing YUV4MPEG2 signature");
    throw FormatError("y4m: header line not terminated");
  }
  return parse_header_line(line);
}

std::string format_header_line(const VideoHeader& h) {
  return fmt::format("YUV4MPEG2 W{} H{} F{}:{} I{} A{}:{} C{}", h.width, h.height, h.fps.num,
                     h.fps.den, h.interlacing, h.pixel_aspect.num, h.pixel_aspect.den,
                     h.chroma == Chroma::C420p10 ? "420p10" : "420jpeg");
}

Frame read_frame(std::istream& in, const VideoHeader& header) {
  if (consume_marker(in) == 0) throw FormatError("y4m: expected FRAME marker, found end of stream");
  return read_payload(in, header);
}

Y4mReader::Y4mReader(std::istream& in) : in_(in) {
  std::string line;
  if (!read_line(in_, line)) {
    if (line.rfind(kSignature, 0) != 0) throw FormatError("y4m: missing YUV4MPEG2 signature");
    throw FormatError("y4m: header line not terminated");
  }
  header_ = parse_header_line(line);
  bytes_ = line.size() + 1;
}

bool Y4mReader::read_marker() {
  const std::size_t n = consume_marker(in_);
  bytes_ += n;
  return n != 0;
}

std::optional<Frame> Y4mReader::next() {
  if (!read_marker()) return std::nullopt;
  Frame f = read_payload(in_, header_);
  bytes_ += header_.frame_payload_bytes();
  ++frames_;
  return f;
}

bool Y4mReader::skip() {
  if (!read_marker()) return false;
  const auto payload = static_cast<std::streamoff>(header_.frame_payload_bytes());
  const auto before = in_.tellg();
  if (before != std::streampos(-1)) {
    in_.seekg(0, std::ios::end);
    const auto end = in_.tellg();
    if (end - before < payload) throw IncompleteFrameError("y4m: frame payload truncated");
    in_.seekg(before + payload);
  } else {
    in_.ignore(payload);
    if (in_.gcount() != payload) throw IncompleteFrameError("y4m: frame payload truncated");
  }
  bytes_ += header_.frame_payload_bytes();
  ++frames_;
  return true;
}

std::size_t write_header(const VideoHeader& header, std::ostream& out) {
  validate(header);
  const std::string line = format_header_line(header) + "\n";
  out << line;
  return line.size();
}

std::size_t write_frame(const VideoHeader& header, const Frame& frame, std::ostream& out) {
  validate(header, frame);
  out << kFrameMarker << '\n';
  std::vector<unsigned char> scratch;
  write_plane(header, frame.y, scratch, out);
  write_plane(header, frame.u, scratch, out);
  write_plane(header, frame.v, scratch, out);
  return kFrameMarker.size() + 1 + header.frame_payload_bytes();
}

std::size_t write_clip(const VideoHeader& header, std::span<const Frame> frames, std::ostream& out) {
  validate(header);
  for (const auto& f : frames) validate(header, f);
  std::size_t total = write_header(header, out);
  for (const auto& f : frames) total += write_frame(header, f, out);
  if (!out) throw IoError("y4m: write failed");
  return total;
}

ClipInfo probe_clip(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open {}", path.string()));
  Y4mReader reader(in);
  while (reader.skip()) {
  }
  return {reader.header(), reader.frames_read()};
}

}  // namespace rdgauge
