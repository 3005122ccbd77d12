/**
 * JSON-RPC 2.0 with Content-Length framing over a byte transport.
 *
 * Symmetric enough for both sides of the wire: the extension uses it as a
 * client against gw-lsp, and tests run a scripted server on the same class.
 */

export interface Transport {
    write(data: Uint8Array): void;
    onData(listener: (chunk: Uint8Array) => void): void;
    onClose?(listener: () => void): void;
}

type PendingEntry = {
    resolve: (value: unknown) => void;
    reject: (err: Error) => void;
};

export class JsonRpcConnection {
    private buffer: Buffer = Buffer.alloc(0);
    private nextId = 1;
    private pending = new Map<number, PendingEntry>();
    private notificationHandlers = new Map<string, (params: any) => void>();
    private requestHandlers = new Map<string, (params: any) => unknown | Promise<unknown>>();
    private closed = false;

    constructor(private transport: Transport) {
        transport.onData((chunk) => this.feed(Buffer.from(chunk)));
        transport.onClose?.(() => this.handleClose());
    }

    request(method: string, params: unknown): Promise<any> {
        const id = this.nextId++;
        const promise = new Promise<any>((resolve, reject) => {
            this.pending.set(id, { resolve, reject });
        });
        this.send({ jsonrpc: "2.0", id, method, params });
        return promise;
    }

    notify(method: string, params: unknown): void {
        this.send({ jsonrpc: "2.0", method, params });
    }

    onNotification(method: string, handler: (params: any) => void): void {
        this.notificationHandlers.set(method, handler);
    }

    onRequest(method: string, handler: (params: any) => unknown | Promise<unknown>): void {
        this.requestHandlers.set(method, handler);
    }

    private send(message: object): void {
        if (this.closed) {
            return;
        }
        const body = Buffer.from(JSON.stringify(message), "utf-8");
        const header = Buffer.from(`Content-Length: ${body.length}\r\n\r\n`, "ascii");
        this.transport.write(Buffer.concat([header, body]));
    }

    private feed(chunk: Buffer): void {
        this.buffer = Buffer.concat([this.buffer, chunk]);
        for (;;) {
            const headerEnd = this.buffer.indexOf("\r\n\r\n");
            if (headerEnd < 0) {
                return;
            }
            const header = this.buffer.subarray(0, headerEnd).toString("ascii");
            const match = /content-length:\s*(\d+)/i.exec(header);
            if (!match) {
                // unframeable prefix: drop it rather than stall the stream
                this.buffer = this.buffer.subarray(headerEnd + 4);
                continue;
            }
            const length = parseInt(match[1], 10);
            const frameEnd = headerEnd + 4 + length;
            if (this.buffer.length < frameEnd) {
                return;
            }
            const body = this.buffer.subarray(headerEnd + 4, frameEnd).toString("utf-8");
            this.buffer = this.buffer.subarray(frameEnd);
            let message: any;
            try {
                message = JSON.parse(body);
            } catch {
                continue;
            }
            this.dispatch(message);
        }
    }

    private dispatch(message: any): void {
        if (message.id !== undefined && message.method === undefined) {
            const entry = this.pending.get(message.id);
            if (!entry) {
                return;
            }
            this.pending.delete(message.id);
            if (message.error) {
                entry.reject(new Error(message.error.message ?? "rpc error"));
            } else {
                entry.resolve(message.result);
            }
            return;
        }
        if (message.id !== undefined) {
            const handler = this.requestHandlers.get(message.method);
            if (!handler) {
                this.send({
                    jsonrpc: "2.0",
                    id: message.id,
                    error: { code: -32601, message: `unsupported method: ${message.method}` },
                });
                return;
            }
            Promise.resolve()
                .then(() => handler(message.params))
                .then(
                (result) => this.send({ jsonrpc: "2.0", id: message.id, result }),
                (err) =>
                    this.send({
                        jsonrpc: "2.0",
                        id: message.id,
                        error: { code: -32603, message: String(err) },
                    }),
            );
            return;
        }
        const handler = this.notificationHandlers.get(message.method);
        handler?.(message.params);
    }

    private handleClose(): void {
        this.closed = true;
        for (const entry of this.pending.values()) {
            entry.reject(new Error("connection closed"));
        }
        this.pending.clear();
    }
}
