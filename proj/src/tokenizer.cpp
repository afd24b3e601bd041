#include "xling/corpus.hpp"
#include "xling/error.hpp"

#include <unicode/brkiter.h>
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utf8.h>

#include <algorithm>
#include <array>
#include <cctype>

namespace xling {
namespace {

constexpr std::array<std::string_view, 64> kEmoticons = {
    ":)",   ":-)",  ":))",  ":)))", ":(",   ":-(",  ":((",  ":'(",  ":'-(", ":')",  ";)",  ";-)",  ";(",
    ":D",   ":-D",  ";D",   ";-D",  "=D",   "=)",   "=(",   "=]",   "=[",   ":P",   ":-P",  ":p",   ":-p",
    ";P",   ";p",   ":/",   ":-/",  ":\\",  ":|",   ":-|",  ":*",   ":-*",  ":o",   ":O",   ":-o",  ":-O",
    ":3",   ":]",   ":[",   ":-]",  ":-[",  ":$",   ":@",   ">:(",  ">:)",  "<3",   "</3",  "^_^",  "^^",
    "-_-",  "o_O",  "O_o",  "T_T",  ";_;",  "xD",   "XD",   "xd",   "D:",   "8)",   "8-)",  "B-)"};

bool is_alnum(UChar32 c) { return u_isalnum(c) != 0; }

// Length in UTF-16 units of the longest emoticon starting at `pos`, or 0.
int32_t match_emoticon(const icu::UnicodeString& s, int32_t pos) {
    int32_t best = 0;
    for (const auto e : kEmoticons) {
        const auto len = static_cast<int32_t>(e.size());
        if (len <= best || pos + len > s.length()) continue;
        bool ok = true;
        for (int32_t i = 0; i < len && ok; ++i) ok = s.charAt(pos + i) == static_cast<char16_t>(e[i]);
        if (ok) best = len;
    }
    return best;
}

bool starts_with_ci(const icu::UnicodeString& s, const char* prefix) {
    const icu::UnicodeString p(prefix, -1, US_INV);
    return s.length() >= p.length() && s.tempSubString(0, p.length()).caseCompare(p, U_FOLD_CASE_DEFAULT) == 0;
}

std::string to_utf8(const icu::UnicodeString& s) {
    std::string out;
    s.toUTF8String(out);
    return out;
}

bool is_joiner(UChar32 c) {
    return c == 0x200D || c == 0xFE0F || c == 0xFE0E || c == 0x20E3 || (c >= 0xE0020 && c <= 0xE007F);
}

}  // namespace

std::span<const std::string_view> emoticon_lexicon() { return kEmoticons; }

bool is_numeral(std::string_view token) {
    if (token.empty()) return false;
    if (!std::isdigit(static_cast<unsigned char>(token.front())) ||
        !std::isdigit(static_cast<unsigned char>(token.back())))
        return false;
    int separators = 0;
    for (const char c : token) {
        if (std::isdigit(static_cast<unsigned char>(c))) continue;
        if (c == '.' || c == ',') {
            if (++separators > 1) return false;
            continue;
        }
        return false;
    }
    return true;
}

bool is_emoji_sequence(std::string_view token) {
    if (token.empty()) return false;
    bool keycap = false;
    bool any_emoji = false;
    bool ascii_base = false;
    int32_t i = 0;
    const auto* data = reinterpret_cast<const uint8_t*>(token.data());
    const auto len = static_cast<int32_t>(token.size());
    while (i < len) {
        UChar32 c;
        U8_NEXT(data, i, len, c);
        if (c < 0) return false;
        if (c == 0x20E3) keycap = true;
        if (is_joiner(c)) continue;
        if (c < 0x80) {
            // Digits, '#' and '*' carry the Emoji property but only form an
            // emoji as the base of a keycap sequence.
            if (!(std::isdigit(c) || c == '#' || c == '*')) return false;
            ascii_base = true;
            continue;
        }
        if (!u_hasBinaryProperty(c, UCHAR_EMOJI)) return false;
        any_emoji = true;
    }
    if (ascii_base && !keycap) return false;
    return any_emoji || keycap;
}

bool is_emoticon(std::string_view token) {
    return std::find(kEmoticons.begin(), kEmoticons.end(), token) != kEmoticons.end();
}

TokenClass classify_token(std::string_view token) {
    if (is_numeral(token)) return TokenClass::Numeral;
    if (is_emoji_sequence(token)) return TokenClass::Emoji;
    if (is_emoticon(token)) return TokenClass::Emoticon;
    return TokenClass::Word;
}

struct Tokenizer::Impl {
    std::unique_ptr<icu::BreakIterator> words;
    const icu::Normalizer2* nfc = nullptr;

    Impl() {
        UErrorCode status = U_ZERO_ERROR;
        words.reset(icu::BreakIterator::createWordInstance(icu::Locale::getRoot(), status));
        if (U_FAILURE(status)) throw Error(std::string("cannot create word break iterator: ") + u_errorName(status));
        nfc = icu::Normalizer2::getNFCInstance(status);
        if (U_FAILURE(status)) throw Error(std::string("cannot load NFC normalizer: ") + u_errorName(status));
    }

    icu::UnicodeString normalize(const icu::UnicodeString& s) const {
        UErrorCode status = U_ZERO_ERROR;
        auto out = nfc->normalize(s, status);
        return U_FAILURE(status) ? s : out;
    }

    void emit(const icu::UnicodeString& raw, bool lowercase, bool fold, std::vector<std::string>& out) const {
        auto norm = normalize(raw);
        auto utf8 = to_utf8(norm);
        if (fold && lowercase && classify_token(utf8) == TokenClass::Word) {
            norm.toLower(icu::Locale::getRoot());
            utf8 = to_utf8(normalize(norm));
        }
        out.push_back(std::move(utf8));
    }

    void segment(const icu::UnicodeString& s, bool lowercase, std::vector<std::string>& out) {
        if (s.isEmpty()) return;
        words->setText(s);
        int32_t start = words->first();
        for (int32_t end = words->next(); end != icu::BreakIterator::DONE; start = end, end = words->next()) {
            const auto piece = s.tempSubStringBetween(start, end);
            bool blank = true;
            for (int32_t i = 0; i < piece.length() && blank; i = piece.moveIndex32(i, 1))
                blank = u_isUWhiteSpace(piece.char32At(i)) != 0;
            if (!blank) emit(piece, lowercase, true, out);
        }
    }

    void chunk(const icu::UnicodeString& c, bool lowercase, std::vector<std::string>& out) {
        if (starts_with_ci(c, "http://") || starts_with_ci(c, "https://") || starts_with_ci(c, "www.")) {
            emit(c, lowercase, false, out);
            return;
        }
        const int32_t len = c.length();
        int32_t seg = 0;
        int32_t pos = 0;
        while (pos < len) {
            const UChar32 cp = c.char32At(pos);
            const bool left_edge = pos == 0 || !is_alnum(c.char32At(c.moveIndex32(pos, -1)));
            if (left_edge || !is_alnum(cp)) {
                if (const int32_t m = match_emoticon(c, pos); m > 0) {
                    const int32_t end = pos + m;
                    const bool right_edge = end == len || !is_alnum(c.char32At(end));
                    // Emoticons starting with a letter or digit ("xD", "8)") only count as a whole chunk.
                    const bool alnum_start = is_alnum(cp);
                    if (right_edge && (!alnum_start || (pos == 0 && end == len))) {
                        segment(c.tempSubStringBetween(seg, pos), lowercase, out);
                        emit(c.tempSubStringBetween(pos, end), lowercase, false, out);
                        pos = seg = end;
                        continue;
                    }
                }
                if (left_edge && (cp == '@' || cp == '#')) {
                    int32_t end = pos + 1;
                    while (end < len) {
                        const UChar32 n = c.char32At(end);
                        if (!is_alnum(n) && n != '_') break;
                        end = c.moveIndex32(end, 1);
                    }
                    if (end > pos + 1) {
                        segment(c.tempSubStringBetween(seg, pos), lowercase, out);
                        emit(c.tempSubStringBetween(pos, end), lowercase, true, out);
                        pos = seg = end;
                        continue;
                    }
                }
            }
            pos = c.moveIndex32(pos, 1);
        }
        segment(c.tempSubStringBetween(seg, len), lowercase, out);
    }
};

Tokenizer::Tokenizer(TokenizerConfig config) : config_(config), impl_(std::make_unique<Impl>()) {}
Tokenizer::~Tokenizer() = default;
Tokenizer::Tokenizer(Tokenizer&&) noexcept = default;
Tokenizer& Tokenizer::operator=(Tokenizer&&) noexcept = default;

std::vector<std::string> Tokenizer::operator()(std::string_view line) {
    // fromUTF8 substitutes U+FFFD for ill-formed sequences.
    const auto text = icu::UnicodeString::fromUTF8(icu::StringPiece(line.data(), static_cast<int32_t>(line.size())));
    std::vector<std::string> out;
    const int32_t len = text.length();
    int32_t pos = 0;
    while (pos < len) {
        while (pos < len && u_isUWhiteSpace(text.char32At(pos))) pos = text.moveIndex32(pos, 1);
        int32_t end = pos;
        while (end < len && !u_isUWhiteSpace(text.char32At(end))) end = text.moveIndex32(end, 1);
        if (end > pos) impl_->chunk(text.tempSubStringBetween(pos, end), config_.lowercase, out);
        pos = end;
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view line, const TokenizerConfig& config) {
    Tokenizer t(config);
    return t(line);
}

}  // namespace xling
