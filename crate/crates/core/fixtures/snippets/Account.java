package bank;

// Simple account.
public class Account {
    private int balance;

    public void deposit(int amount) {
        if (amount <= 0) {
            throw new IllegalArgumentException("amount && more");
        }
        balance += amount;
    }

    /* Withdraw when covered
       by the balance. */
    public boolean withdraw(int amount) {
        if (amount > 0 && amount <= balance) {
            balance -= amount;
            return true;
        } else if (amount == 0) {
            return false;
        }
        return false;
    }

    public String describe() {
        return balance > 100 ? "rich" : "poor";
    }
}
