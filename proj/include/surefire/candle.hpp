#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace surefire {

// Prices are integer pip counts: 1 pip = 0.00001 price units.
using Pips = std::int64_t;
constexpr std::int64_t kPipsPerUnit = 100000;

struct Candle {
    std::int64_t timestamp = 0;  // UTC seconds since epoch
    Pips open = 0;
    Pips high = 0;
    Pips low = 0;
    Pips close = 0;

    bool valid() const {
        return low > 0 && low <= high && low <= open && low <= close &&
               high >= open && high >= close;
    }
    bool operator==(const Candle&) const = default;
};

struct CandleSeries {
    std::vector<Candle> candles;
    std::int64_t bar_period = 4 * 3600;  // seconds

    std::size_t size() const { return candles.size(); }
    const Candle& operator[](std::size_t i) const { return candles[i]; }
};

constexpr std::size_t kWindowSize = 12;

// Contiguous view of exactly 12 candles.
using CandleWindow = std::span<const Candle, kWindowSize>;

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// days-from-civil (Hinnant); valid for the Gregorian proleptic calendar
inline std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2) / 5 + static_cast<unsigned>(d) - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

}  // namespace detail

// ISO-8601 UTC instant, e.g. 2018-08-01T00:00:00Z (trailing Z optional).
inline std::int64_t parse_timestamp(const std::string& s) {
    int y, mo, d, h, mi, sec;
    char t;
    if (std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &t, &h, &mi, &sec) != 7 ||
        (t != 'T' && t != ' '))
        throw CsvError("bad timestamp: " + s);
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || sec < 0 || sec > 60)
        throw CsvError("bad timestamp: " + s);
    return detail::days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + sec;
}

// Date-only form, e.g. 2018-08-01 -> midnight UTC.
inline std::int64_t parse_date(const std::string& s) {
    int y, mo, d;
    if (std::sscanf(s.c_str(), "%d-%d-%d", &y, &mo, &d) != 3)
        throw CsvError("bad date: " + s);
    return detail::days_from_civil(y, mo, d) * 86400;
}

inline std::string format_timestamp(std::int64_t ts) {
    int y, mo, d;
    detail::civil_from_days(ts >= 0 ? ts / 86400 : (ts - 86399) / 86400, y, mo, d);
    std::int64_t rem = ((ts % 86400) + 86400) % 86400;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02lld:%02lld:%02lldZ", y, mo, d,
                  static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                  static_cast<long long>(rem % 60));
    return buf;
}

// "1.16900" -> 116900 pips; at most 5 fractional digits.
inline Pips parse_price_pips(const std::string& s) {
    if (s.empty()) throw CsvError("empty price field");
    std::size_t i = 0;
    bool neg = false;
    if (s[i] == '-' || s[i] == '+') { neg = s[i] == '-'; ++i; }
    std::int64_t whole = 0;
    bool any = false;
    for (; i < s.size() && s[i] >= '0' && s[i] <= '9'; ++i) {
        whole = whole * 10 + (s[i] - '0');
        any = true;
    }
    std::int64_t frac = 0;
    int fd = 0;
    if (i < s.size() && s[i] == '.') {
        ++i;
        for (; i < s.size() && s[i] >= '0' && s[i] <= '9'; ++i) {
            if (fd >= 5) throw CsvError("more than 5 fractional digits in price: " + s);
            frac = frac * 10 + (s[i] - '0');
            ++fd;
            any = true;
        }
    }
    if (!any || i != s.size()) throw CsvError("bad price: " + s);
    while (fd < 5) { frac *= 10; ++fd; }
    Pips p = whole * kPipsPerUnit + frac;
    return neg ? -p : p;
}

inline std::string format_price(Pips p) {
    char buf[32];
    const char* sign = p < 0 ? "-" : "";
    std::int64_t a = p < 0 ? -p : p;
    std::snprintf(buf, sizeof buf, "%s%lld.%05lld", sign, static_cast<long long>(a / kPipsPerUnit),
                  static_cast<long long>(a % kPipsPerUnit));
    return buf;
}

// CSV header: timestamp,open,high,low,close. LF or CRLF. Gaps rejected
// unless allow_gaps; timestamps must be strictly increasing either way.
inline CandleSeries load_csv(std::istream& in, std::int64_t bar_period = 4 * 3600,
                             bool allow_gaps = false) {
    CandleSeries series;
    series.bar_period = bar_period;
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw CsvError("empty input");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "timestamp,open,high,low,close")
        throw CsvError("line 1: expected header timestamp,open,high,low,close");
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::array<std::string, 5> field;
        std::size_t start = 0, fi = 0;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                if (fi >= 5) throw CsvError("line " + std::to_string(lineno) + ": too many fields");
                field[fi++] = line.substr(start, i - start);
                start = i + 1;
            }
        }
        if (fi != 5) throw CsvError("line " + std::to_string(lineno) + ": expected 5 fields");
        Candle c;
        try {
            c.timestamp = parse_timestamp(field[0]);
            c.open = parse_price_pips(field[1]);
            c.high = parse_price_pips(field[2]);
            c.low = parse_price_pips(field[3]);
            c.close = parse_price_pips(field[4]);
        } catch (const CsvError& e) {
            throw CsvError("line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!c.valid())
            throw CsvError("line " + std::to_string(lineno) + ": OHLC invariant violated");
        if (!series.candles.empty()) {
            std::int64_t dt = c.timestamp - series.candles.back().timestamp;
            if (dt <= 0)
                throw CsvError("line " + std::to_string(lineno) + ": non-monotonic timestamp");
            if (dt != bar_period && !allow_gaps)
                throw CsvError("line " + std::to_string(lineno) + ": gap of " +
                               std::to_string(dt) + "s (expected " + std::to_string(bar_period) +
                               "s); pass allow-gaps to accept");
        }
        series.candles.push_back(c);
    }
    return series;
}

inline void write_csv(std::ostream& out, const CandleSeries& series) {
    out << "timestamp,open,high,low,close\n";
    for (const Candle& c : series.candles)
        out << format_timestamp(c.timestamp) << ',' << format_price(c.open) << ','
            << format_price(c.high) << ',' << format_price(c.low) << ','
            << format_price(c.close) << '\n';
}

// Windows end at indices 11, 11+stride, ...
inline std::vector<CandleWindow> sliding_windows(const CandleSeries& series,
                                                 std::size_t stride = 1) {
    if (series.size() < kWindowSize)
        throw std::invalid_argument("series shorter than " + std::to_string(kWindowSize) + " bars");
    if (stride == 0) throw std::invalid_argument("stride must be positive");
    std::vector<CandleWindow> out;
    for (std::size_t end = kWindowSize - 1; end < series.size(); end += stride)
        out.push_back(CandleWindow(series.candles.data() + end + 1 - kWindowSize, kWindowSize));
    return out;
}

}  // namespace surefire
