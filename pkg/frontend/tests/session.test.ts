import { describe, expect, it } from 'vitest';

import {
  applyValidation, diagnosticsStale, editSource, errorCount, initialSession,
  loadExample,
} from '../src/session.js';

const DIAG = { severity: 'ERROR', code: 'VAL003', message: 'mismatch',
               line: 4, col: 2 };

describe('session state', () => {
  it('starts clean', () => {
    const state = initialSession();
    expect(state.dirty).toBe(false);
    expect(state.lastDiagnostics).toBeNull();
    expect(diagnosticsStale(state)).toBe(false);
  });

  it('editing marks the session dirty', () => {
    const state = editSource(initialSession(), 'thing T {}');
    expect(state.dirty).toBe(true);
    expect(state.source).toBe('thing T {}');
  });

  it('identical text is not an edit', () => {
    const state = editSource(initialSession(), '');
    expect(state.dirty).toBe(false);
  });

  it('validation clears dirtiness and stores diagnostics verbatim', () => {
    let state = editSource(initialSession(), 'x');
    const received = [DIAG, { ...DIAG, severity: 'WARNING', code: 'VAL005' }];
    state = applyValidation(state, received);
    expect(state.dirty).toBe(false);
    // rendered diagnostics == received diagnostics: same objects, same order
    expect(state.lastDiagnostics).toEqual(received);
    expect(errorCount(state)).toBe(1);
  });

  it('diagnostics become stale when the source changes afterwards', () => {
    let state = applyValidation(editSource(initialSession(), 'a'), [DIAG]);
    expect(diagnosticsStale(state)).toBe(false);
    state = editSource(state, 'ab');
    expect(diagnosticsStale(state)).toBe(true);
    expect(state.lastDiagnostics).toEqual([DIAG]); // kept, just stale
  });

  it('loading an example replaces the source and resets diagnostics', () => {
    let state = applyValidation(editSource(initialSession(), 'old'), [DIAG]);
    state = loadExample(state, 'demo', 'new source');
    expect(state.selectedExample).toBe('demo');
    expect(state.source).toBe('new source');
    expect(state.lastDiagnostics).toBeNull();
    expect(state.dirty).toBe(true); // not validated yet
  });
});
