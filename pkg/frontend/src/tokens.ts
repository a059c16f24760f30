// Lexical scanner for editor highlighting.
//
// Mirrors the server lexer's token classes exactly (the test suite
// cross-checks against a fixture produced by the server), plus two
// editor-only classes: "comment" (the server skips comments) and "plain"
// (whitespace and characters the language does not know, styled as-is).
// Highlighting is lexical only; no parsing happens client-side.

export type TokenClass =
  | 'keyword'
  | 'identifier'
  | 'int-literal'
  | 'real-literal'
  | 'string-literal'
  | 'bool-literal'
  | 'punctuation'
  | 'operator'
  | 'comment'
  | 'plain';

export interface TokenSpan {
  start: number; // inclusive offset
  end: number;   // exclusive offset
  cls: TokenClass;
}

export const KEYWORDS: readonly string[] = [
  'thing', 'property', 'message', 'provided', 'required', 'port',
  'receives', 'sends', 'data_analytics', 'dataset', 'features', 'label',
  'model', 'save_to', 'linear_regression', 'knn', 'statechart', 'init',
  'state', 'on', 'entry', 'exit', 'transition', 'event', 'guard', 'action',
  'after', 'print', 'var', 'if', 'then', 'else', 'end', 'da_train',
  'da_predict', 'da_save', 'da_observe', 'configuration', 'instance',
  'connector', 'and', 'or', 'not', 'int', 'real', 'bool', 'string',
];

const KEYWORD_SET = new Set(KEYWORDS);
const BOOL_LITERALS = new Set(['true', 'false']);
// longest first for max-munch
const OPERATORS = ['<->', '->', '<=', '>=', '==', '!=', '<', '>', '=', '!',
                   '?', '+', '-', '*', '/'];
const PUNCTUATION = '{}():,.;';

const isIdentStart = (c: string) => /[A-Za-z_]/.test(c);
const isIdentPart = (c: string) => /[A-Za-z0-9_]/.test(c);
const isDigit = (c: string) => c >= '0' && c <= '9';

/** Tokenize the whole source into contiguous spans covering every char. */
export function scan(source: string): TokenSpan[] {
  const spans: TokenSpan[] = [];
  const n = source.length;
  let i = 0;

  const push = (start: number, end: number, cls: TokenClass) => {
    if (end > start) spans.push({ start, end, cls });
  };

  while (i < n) {
    const c = source[i];
    const start = i;

    if (c === ' ' || c === '\t' || c === '\r' || c === '\n') {
      while (i < n && ' \t\r\n'.includes(source[i])) i++;
      push(start, i, 'plain');
      continue;
    }

    if (c === '/' && source[i + 1] === '/') {
      while (i < n && source[i] !== '\n') i++;
      push(start, i, 'comment');
      continue;
    }

    if (isIdentStart(c)) {
      while (i < n && isIdentPart(source[i])) i++;
      const word = source.slice(start, i);
      const cls: TokenClass = BOOL_LITERALS.has(word) ? 'bool-literal'
        : KEYWORD_SET.has(word) ? 'keyword' : 'identifier';
      push(start, i, cls);
      continue;
    }

    if (isDigit(c)) {
      while (i < n && isDigit(source[i])) i++;
      let real = false;
      if (source[i] === '.' && isDigit(source[i + 1])) {
        real = true;
        i++;
        while (i < n && isDigit(source[i])) i++;
      }
      if (source[i] === 'e' || source[i] === 'E') {
        let look = i + 1;
        if (source[look] === '+' || source[look] === '-') look++;
        if (isDigit(source[look] ?? '')) {
          real = true;
          i = look + 1;
          while (i < n && isDigit(source[i])) i++;
        }
      }
      push(start, i, real ? 'real-literal' : 'int-literal');
      continue;
    }

    if (c === '"') {
      i++;
      while (i < n) {
        if (source[i] === '\\' && i + 1 < n) { i += 2; continue; }
        if (source[i] === '"') { i++; break; }
        if (source[i] === '\n') break;
        i++;
      }
      // an unterminated string still highlights as a string to end of line
      push(start, i, 'string-literal');
      continue;
    }

    const op = OPERATORS.find((candidate) => source.startsWith(candidate, i));
    if (op) {
      i += op.length;
      push(start, i, 'operator');
      continue;
    }

    if (PUNCTUATION.includes(c)) {
      i++;
      push(start, i, 'punctuation');
      continue;
    }

    // unknown character: styled as plain text, never an error client-side
    i++;
    push(start, i, 'plain');
  }
  return spans;
}

/** 0-based offset of 1-based line:col in source (for cursor placement). */
export function offsetOf(source: string, line: number, col: number): number {
  let offset = 0;
  let current = 1;
  while (current < line) {
    const nl = source.indexOf('\n', offset);
    if (nl < 0) return source.length;
    offset = nl + 1;
    current++;
  }
  return Math.min(offset + col - 1, source.length);
}
