// Editor session state and its transitions.
//
// `lastDiagnostics` always corresponds to some previously validated snapshot
// of the source; while `dirty` is set they may be stale, and the UI must
// say so.  Diagnostics are stored exactly as received: no filtering, no
// reordering.

import { Diagnostic } from './api.js';

export interface EditorSessionState {
  source: string;
  lastDiagnostics: Diagnostic[] | null;
  dirty: boolean;
  selectedExample: string | null;
}

export function initialSession(): EditorSessionState {
  return { source: '', lastDiagnostics: null, dirty: false,
           selectedExample: null };
}

export function editSource(state: EditorSessionState,
                           source: string): EditorSessionState {
  if (source === state.source) return state;
  return { ...state, source, dirty: true };
}

export function loadExample(state: EditorSessionState, name: string,
                            source: string): EditorSessionState {
  return { source, lastDiagnostics: null, dirty: true,
           selectedExample: name };
}

export function applyValidation(state: EditorSessionState,
                                diagnostics: Diagnostic[]): EditorSessionState {
  return { ...state, lastDiagnostics: diagnostics, dirty: false };
}

/** True when shown diagnostics no longer match the edited source. */
export function diagnosticsStale(state: EditorSessionState): boolean {
  return state.dirty && state.lastDiagnostics !== null;
}

export function errorCount(state: EditorSessionState): number {
  if (!state.lastDiagnostics) return 0;
  return state.lastDiagnostics.filter((d) => d.severity === 'ERROR').length;
}
