#include <curl/curl.h>
#include <openssl/evp.h>
#include <zlib.h>

#include <cstring>
#include <stdexcept>

#include "seqleak/ingest.hpp"
#include "seqleak/io.hpp"

namespace seqleak {

namespace {

std::size_t curl_sink(char* data, std::size_t size, std::size_t nmemb, void* userdata) {
  auto* out = static_cast<std::string*>(userdata);
  out->append(data, size * nmemb);
  return size * nmemb;
}

std::string download(const std::string& url) {
  CURL* curl = curl_easy_init();
  if (!curl) throw std::runtime_error("fetch: curl initialization failed");
  std::string body;
  curl_easy_setopt(curl, CURLOPT_URL, url.c_str());
  curl_easy_setopt(curl, CURLOPT_FOLLOWLOCATION, 1L);
  curl_easy_setopt(curl, CURLOPT_WRITEFUNCTION, curl_sink);
  curl_easy_setopt(curl, CURLOPT_WRITEDATA, &body);
  curl_easy_setopt(curl, CURLOPT_FAILONERROR, 1L);
  curl_easy_setopt(curl, CURLOPT_CONNECTTIMEOUT, 30L);
  const CURLcode rc = curl_easy_perform(curl);
  curl_easy_cleanup(curl);
  if (rc != CURLE_OK)
    throw std::runtime_error(std::string("fetch: download failed: ") + curl_easy_strerror(rc));
  return body;
}

std::uint32_t read_u32(const std::string& s, std::size_t off) {
  if (off + 4 > s.size()) throw std::runtime_error("zip: truncated archive");
  return static_cast<std::uint32_t>(static_cast<unsigned char>(s[off])) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + 1])) << 8) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + 2])) << 16) |
         (static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + 3])) << 24);
}

std::uint16_t read_u16(const std::string& s, std::size_t off) {
  if (off + 2 > s.size()) throw std::runtime_error("zip: truncated archive");
  return static_cast<std::uint16_t>(static_cast<unsigned char>(s[off]) |
                                    (static_cast<unsigned char>(s[off + 1]) << 8));
}

std::string inflate_raw(const char* data, std::size_t compressed_size,
                        std::size_t expected_size) {
  std::string out(expected_size, '\0');
  z_stream strm{};
  if (inflateInit2(&strm, -MAX_WBITS) != Z_OK)
    throw std::runtime_error("zip: inflate initialization failed");
  strm.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data));
  strm.avail_in = static_cast<uInt>(compressed_size);
  strm.next_out = reinterpret_cast<Bytef*>(out.data());
  strm.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&strm, Z_FINISH);
  inflateEnd(&strm);
  if (rc != Z_STREAM_END || strm.total_out != expected_size)
    throw std::runtime_error("zip: corrupt deflate stream");
  return out;
}

}  // namespace

std::string md5_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int digest_len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_md5(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest, &digest_len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("md5: digest computation failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < digest_len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

void extract_zip(const std::string& zip, const std::filesystem::path& dest_dir) {
  // Locate the end-of-central-directory record (it may be followed by a
  // comment of up to 64k).
  constexpr std::uint32_t kEocdSig = 0x06054b50;
  constexpr std::uint32_t kCentralSig = 0x02014b50;
  constexpr std::uint32_t kLocalSig = 0x04034b50;
  if (zip.size() < 22) throw std::runtime_error("zip: archive too small");
  std::size_t eocd = std::string::npos;
  const std::size_t scan_limit = zip.size() >= 22 + 65535 ? zip.size() - 22 - 65535 : 0;
  for (std::size_t off = zip.size() - 22 + 1; off-- > scan_limit;) {
    if (read_u32(zip, off) == kEocdSig) { eocd = off; break; }
  }
  if (eocd == std::string::npos) throw std::runtime_error("zip: no end-of-central-directory");

  const std::uint16_t n_entries = read_u16(zip, eocd + 10);
  std::size_t pos = read_u32(zip, eocd + 16);

  for (std::uint16_t e = 0; e < n_entries; ++e) {
    if (read_u32(zip, pos) != kCentralSig)
      throw std::runtime_error("zip: bad central directory entry");
    const std::uint16_t method = read_u16(zip, pos + 10);
    const std::uint32_t compressed_size = read_u32(zip, pos + 20);
    const std::uint32_t uncompressed_size = read_u32(zip, pos + 24);
    const std::uint16_t name_len = read_u16(zip, pos + 28);
    const std::uint16_t extra_len = read_u16(zip, pos + 30);
    const std::uint16_t comment_len = read_u16(zip, pos + 32);
    const std::uint32_t local_offset = read_u32(zip, pos + 42);
    const std::string name = zip.substr(pos + 46, name_len);
    pos += 46 + name_len + extra_len + comment_len;

    if (name.find("..") != std::string::npos)
      throw std::runtime_error("zip: refusing path traversal entry " + name);
    const std::filesystem::path target = dest_dir / name;
    if (!name.empty() && name.back() == '/') {
      std::filesystem::create_directories(target);
      continue;
    }

    if (read_u32(zip, local_offset) != kLocalSig)
      throw std::runtime_error("zip: bad local header for " + name);
    const std::uint16_t local_name_len = read_u16(zip, local_offset + 26);
    const std::uint16_t local_extra_len = read_u16(zip, local_offset + 28);
    const std::size_t data_off = local_offset + 30 + local_name_len + local_extra_len;
    if (data_off + compressed_size > zip.size())
      throw std::runtime_error("zip: truncated data for " + name);

    std::string content;
    if (method == 0) {
      content = zip.substr(data_off, compressed_size);
    } else if (method == 8) {
      content = inflate_raw(zip.data() + data_off, compressed_size, uncompressed_size);
    } else {
      throw std::runtime_error("zip: unsupported compression method for " + name);
    }
    write_text_file(target, content);
  }
}

void fetch_ml100k(const std::filesystem::path& dest_dir, const std::string& url,
                  const std::string& expected_md5) {
  const std::string archive = download(url);
  const std::string digest = md5_hex(archive);
  if (digest != expected_md5)
    throw std::runtime_error("fetch: checksum mismatch, expected " + expected_md5 + " got " +
                             digest);
  extract_zip(archive, dest_dir);
  if (!ml100k_present(dest_dir / "ml-100k"))
    throw std::runtime_error("fetch: archive extracted but ml-100k layout missing");
}

}  // namespace seqleak
