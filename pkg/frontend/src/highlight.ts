// Token spans -> HTML for the highlight overlay.

import { scan, TokenClass } from './tokens.js';

const CLASS_NAMES: Record<TokenClass, string> = {
  'keyword': 'tok-keyword',
  'identifier': 'tok-ident',
  'int-literal': 'tok-number',
  'real-literal': 'tok-number',
  'string-literal': 'tok-string',
  'bool-literal': 'tok-bool',
  'punctuation': 'tok-punct',
  'operator': 'tok-op',
  'comment': 'tok-comment',
  'plain': 'tok-plain',
};

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, '&amp;')
    .replace(/</g, '&lt;')
    .replace(/>/g, '&gt;')
    .replace(/"/g, '&quot;');
}

/** Render highlighted HTML for the overlay; covers the entire source. */
export function highlight(source: string): string {
  const parts: string[] = [];
  for (const span of scan(source)) {
    const text = escapeHtml(source.slice(span.start, span.end));
    if (span.cls === 'plain') {
      parts.push(text);
    } else {
      parts.push(`<span class="${CLASS_NAMES[span.cls]}">${text}</span>`);
    }
  }
  return parts.join('');
}
