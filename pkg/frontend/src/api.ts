// Typed client for the toolchain's HTTP API.
//
// One in-flight validate and one in-flight generate at a time: each call
// bumps a sequence number, and a response whose request was superseded
// resolves to null so the UI never renders stale results.

export interface Diagnostic {
  severity: string;
  code: string;
  message: string;
  line: number;
  col: number;
}

export interface ValidateResponse {
  valid: boolean;
  diagnostics: Diagnostic[];
}

export interface ExampleEntry {
  name: string;
  source: string;
}

export type GenerateResult =
  | { kind: 'zip'; data: ArrayBuffer; filename: string }
  | { kind: 'diagnostics'; diagnostics: Diagnostic[] }
  | { kind: 'error'; status: number; detail: string };

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export function filenameFromDisposition(header: string | null): string {
  const match = header ? /filename="([^"]+)"/.exec(header) : null;
  return match ? match[1] : 'generated.zip';
}

export class ApiClient {
  private validateSeq = 0;
  private generateSeq = 0;

  constructor(
    private readonly baseUrl: string = '',
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async health(): Promise<{ version: string }> {
    const response = await this.fetchImpl(`${this.baseUrl}/health`);
    return response.json();
  }

  async examples(): Promise<ExampleEntry[]> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/examples`);
    if (!response.ok) throw new Error(`examples failed: ${response.status}`);
    return response.json();
  }

  /** Resolves null when a newer validate superseded this one. */
  async validate(source: string): Promise<ValidateResponse | null> {
    const seq = ++this.validateSeq;
    const response = await this.fetchImpl(`${this.baseUrl}/api/validate`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ source }),
    });
    if (seq !== this.validateSeq) return null;
    if (!response.ok) {
      const detail = await safeDetail(response);
      throw new Error(`validate failed (${response.status}): ${detail}`);
    }
    return response.json();
  }

  /** Resolves null when a newer generate superseded this one. */
  async generate(source: string, config: string,
                 name?: string): Promise<GenerateResult | null> {
    const seq = ++this.generateSeq;
    const body: Record<string, string> = { source, config };
    if (name) body.name = name;
    const response = await this.fetchImpl(`${this.baseUrl}/api/generate`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (seq !== this.generateSeq) return null;
    if (response.status === 200) {
      return {
        kind: 'zip',
        data: await response.arrayBuffer(),
        filename: filenameFromDisposition(
          response.headers.get('content-disposition')),
      };
    }
    if (response.status === 422) {
      const payload = await response.json();
      return { kind: 'diagnostics', diagnostics: payload.diagnostics ?? [] };
    }
    return {
      kind: 'error',
      status: response.status,
      detail: await safeDetail(response),
    };
  }
}

async function safeDetail(response: Response): Promise<string> {
  try {
    const payload = await response.json();
    return typeof payload.detail === 'string'
      ? payload.detail : JSON.stringify(payload);
  } catch {
    return response.statusText || 'request failed';
  }
}
