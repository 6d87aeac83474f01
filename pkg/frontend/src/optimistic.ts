/**
 * Optimistic UI update with rollback.
 *
 * The screen applies the hoped-for state immediately, sends the request,
 * and either confirms with the server's answer or rolls back to the
 * previous state when the request fails. All state of record stays on the
 * server; this only smooths the interaction.
 */

export interface OptimisticOptions<T> {
  /** State currently displayed, restored on failure. */
  current: T;
  /** State to display while the request is in flight. */
  optimistic: T;
  /** Applies a state to the DOM. */
  apply: (value: T, pending: boolean) => void;
  /** Sends the request; resolves with the confirmed state. */
  request: () => Promise<T>;
}

export async function optimisticUpdate<T>(options: OptimisticOptions<T>): Promise<T> {
  options.apply(options.optimistic, true);
  try {
    const confirmed = await options.request();
    options.apply(confirmed, false);
    return confirmed;
  } catch (error) {
    options.apply(options.current, false);
    throw error;
  }
}
